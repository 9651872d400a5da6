// Release gate: every shipping criterion of the layer kit, one line each.
//
// The binary prints exactly one PASS/FAIL line per criterion and exits
// nonzero if any criterion failed. Intermediate artifacts (metric dumps used
// by the determinism criterion) land in acceptance_tmp/ next to the binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "srnn/dataset.hpp"
#include "srnn/gradcheck.hpp"
#include "srnn/impulse.hpp"
#include "srnn/mac_count.hpp"
#include "srnn/model.hpp"
#include "srnn/resource_model.hpp"
#include "srnn/rng.hpp"
#include "srnn/rnn2d.hpp"
#include "srnn/rnn_cell.hpp"
#include "srnn/rnn_layers.hpp"
#include "srnn/tensor.hpp"

namespace fs = std::filesystem;

namespace {

fs::path g_work = "acceptance_tmp";

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    if (!is) throw std::runtime_error("cannot read " + path.string());
    return buf.str();
}

// ---------------------------------------------------------------------------
// criterion 1: closed-form parameter counts hit the reference sizes exactly

bool criterion_params(std::string& detail) {
    const struct {
        std::int64_t c_in, c_mid, c_out, want;
    } rnn_rows[] = {
        {19, 65, 65, 14170},
        {37, 90, 90, 27990},
        {57, 65, 65, 16640},
    };
    for (const auto& r : rnn_rows) {
        const std::int64_t got =
            srnn::srnn_param_count({r.c_in, r.c_mid, r.c_out, false, 1, 1});
        if (got != r.want) {
            detail = "separable head " + std::to_string(r.c_in) + "->" +
                     std::to_string(r.c_mid) + "/" + std::to_string(r.c_out) + " gave " +
                     std::to_string(got) + ", want " + std::to_string(r.want);
            return false;
        }
    }
    const struct {
        std::int64_t c_in, c_out, k;
        bool bias;
        std::int64_t want;
    } conv_rows[] = {
        {33, 56, 3, false, 16632},
        {37, 19, 1, false, 703},
        {19, 19, 3, true, 3268},
    };
    for (const auto& c : conv_rows) {
        const std::int64_t got = srnn::conv2d_param_count({c.c_in, c.c_out, c.k, c.bias, 1, 1});
        if (got != c.want) {
            detail = "conv " + std::to_string(c.c_in) + "->" + std::to_string(c.c_out) + " k" +
                     std::to_string(c.k) + " gave " + std::to_string(got) + ", want " +
                     std::to_string(c.want);
            return false;
        }
    }
    if (4 * srnn::conv2d_param_count({19, 19, 3, true, 1, 1}) != 13072) {
        detail = "stacked 3x3 block total is not 13072";
        return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// criterion 2: instrumented execution equals the closed-form MAC model

bool criterion_macs(std::string& detail) {
    for (int ci = 1; ci <= 6; ++ci)
        for (int cm = 1; cm <= 6; ++cm)
            for (int co = 1; co <= 6; ++co)
                for (int h = 1; h <= 5; ++h)
                    for (int w = 1; w <= 5; ++w)
                        for (const bool bidi : {false, true}) {
                            const std::int64_t got =
                                srnn::count_macs_srnn_empirical(ci, cm, co, h, w, bidi);
                            const std::int64_t want =
                                srnn::srnn_mac_count({ci, cm, co, bidi, h, w});
                            if (got != want) {
                                detail = "separable scan " + std::to_string(ci) + "/" +
                                         std::to_string(cm) + "/" + std::to_string(co) + " " +
                                         std::to_string(h) + "x" + std::to_string(w) +
                                         (bidi ? " bidi" : "") + ": counted " +
                                         std::to_string(got) + ", formula " +
                                         std::to_string(want);
                                return false;
                            }
                        }
    for (int ci = 1; ci <= 6; ++ci)
        for (int co = 1; co <= 6; ++co)
            for (const int k : {1, 3, 5})
                for (int h = 1; h <= 5; ++h)
                    for (int w = 1; w <= 5; ++w)
                        for (const bool bias : {false, true}) {
                            const std::int64_t got =
                                srnn::count_macs_conv2d_empirical(ci, co, k, h, w, bias);
                            const std::int64_t want =
                                srnn::conv2d_mac_count({ci, co, k, bias, h, w});
                            if (got != want) {
                                detail = "conv " + std::to_string(ci) + "->" +
                                         std::to_string(co) + " k" + std::to_string(k) + " " +
                                         std::to_string(h) + "x" + std::to_string(w) +
                                         (bias ? " bias" : "") + ": counted " +
                                         std::to_string(got) + ", formula " +
                                         std::to_string(want);
                                return false;
                            }
                        }
    const double limit = 4.0 / 9.0;
    for (const std::int64_t c : {100, 128, 256, 1000}) {
        const double ratio = srnn::mac_ratio(c, 3);
        if (std::abs(ratio - limit) / limit >= 0.01) {
            detail = "mac_ratio(" + std::to_string(c) + ",3) off the 4/9 limit by >=1%";
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// criterion 3: analytic gradients vs central differences, all layer kinds

constexpr srnn::GradLayerKind kAllKinds[] = {
    srnn::GradLayerKind::RnnSeq,  srnn::GradLayerKind::RnnRows,
    srnn::GradLayerKind::Srnn,    srnn::GradLayerKind::WsBirnnRows,
    srnn::GradLayerKind::SwsBirnn, srnn::GradLayerKind::Rnn2d,
    srnn::GradLayerKind::DsRnn,   srnn::GradLayerKind::Conv2d,
    srnn::GradLayerKind::Dense,
};

bool criterion_gradients(std::string& metric_text, std::string& detail) {
    constexpr double kTol = 1e-5;
    std::ostringstream metrics;
    metrics.precision(std::numeric_limits<double>::max_digits10);
    bool ok = true;
    for (const srnn::GradLayerKind kind : kAllKinds) {
        for (int i = 0; i < 20; ++i) {
            srnn::GradCheckShape shape;
            if (i % 2 == 1) {
                shape.h = 4;
                shape.w = 7;
                shape.c_in = 2;
                shape.c_mid = 3;
                shape.c_out = 3;
                shape.stride = 2;
            }
            const srnn::Activation act =
                (i % 3 == 2) ? srnn::Activation::Identity : srnn::Activation::Tanh;
            const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(i);
            const srnn::GradCheckReport rep = srnn::gradcheck_layer(kind, shape, act, seed);
            metrics << srnn::grad_layer_name(kind) << " seed " << seed << " act "
                    << srnn::activation_name(act) << " max_rel_err " << rep.max_rel_err << "\n";
            if (!(rep.max_rel_err < kTol)) {
                ok = false;
                if (detail.empty())
                    detail = std::string(srnn::grad_layer_name(kind)) + " seed " +
                             std::to_string(seed) + " rel err " +
                             std::to_string(rep.max_rel_err);
            }
        }
    }
    const srnn::GradCheckReport crnn = srnn::gradcheck_crnn(4242);
    metrics << "crnn max_rel_err " << crnn.max_rel_err << "\n";
    if (!(crnn.max_rel_err < kTol)) {
        ok = false;
        if (detail.empty()) detail = "end-to-end crnn rel err " + std::to_string(crnn.max_rel_err);
    }
    metric_text = metrics.str();
    return ok;
}

// ---------------------------------------------------------------------------
// criterion 4: impulse-response properties of the bidirectional layers

bool criterion_impulse(std::string& metric_text, std::string& detail) {
    std::ostringstream metrics;
    metrics.precision(std::numeric_limits<double>::max_digits10);
    bool ok = true;

    // (a) zero-bias bidirectional scans answer symmetrically about the
    // impulse column, for random tanh cells
    for (std::uint64_t seed = 900; seed < 910; ++seed) {
        auto cell = srnn::make_rnn_cell<double>(2, 3, srnn::Activation::Tanh);
        srnn::Rng rng(seed);
        srnn::init_rnn_cell(cell, rng);
        cell.b_ih.assign(cell.b_ih.size(), 0.0);
        cell.b_hh.assign(cell.b_hh.size(), 0.0);
        const srnn::ImpulsePoint at{0, 5, 0};
        const std::vector<double> field =
            srnn::field_of(srnn::impulse_response_ws_birnn_rows(cell, 1, 11, {&at, 1}));
        metrics << "symmetry seed " << seed;
        for (double v : field) metrics << " " << v;
        metrics << "\n";
        for (int d = 1; d <= 5; ++d)
            if (std::abs(field[static_cast<std::size_t>(5 + d)] -
                         field[static_cast<std::size_t>(5 - d)]) > 1e-6) {
                ok = false;
                if (detail.empty())
                    detail = "asymmetric response at distance " + std::to_string(d) +
                             ", seed " + std::to_string(seed);
            }
    }

    // (b) the halving-recurrence preset reproduces the hand-computed profile
    std::vector<double> expect(9);
    for (int k = 0; k < 9; ++k)
        expect[static_cast<std::size_t>(k)] = (k == 4) ? 2.0 : std::ldexp(1.0, -std::abs(k - 4));
    const srnn::ImpulsePoint center{0, 4, 0};
    const std::vector<double> profile = srnn::field_of(
        srnn::impulse_response_ws_birnn_rows(srnn::decay_half_cell<double>(), 1, 9, {&center, 1}));
    metrics << "profile";
    for (double v : profile) metrics << " " << v;
    metrics << "\n";
    for (int k = 0; k < 9; ++k)
        if (profile[static_cast<std::size_t>(k)] != expect[static_cast<std::size_t>(k)]) {
            ok = false;
            if (detail.empty()) detail = "1d profile mismatch at column " + std::to_string(k);
        }

    // (c) the two-pass layer factors as the outer product of that profile
    const srnn::ImpulsePoint mid{4, 4, 0};
    const std::vector<double> grid = srnn::field_of(
        srnn::impulse_response_sws_birnn(srnn::decay_half_srnn<double>(), 9, 9, {&mid, 1}));
    metrics << "grid";
    for (double v : grid) metrics << " " << v;
    metrics << "\n";
    for (int j = 0; j < 9; ++j)
        for (int k = 0; k < 9; ++k)
            if (grid[static_cast<std::size_t>(j * 9 + k)] !=
                expect[static_cast<std::size_t>(j)] * expect[static_cast<std::size_t>(k)]) {
                ok = false;
                if (detail.empty())
                    detail = "2d map is not the outer product at (" + std::to_string(j) + "," +
                             std::to_string(k) + ")";
            }

    metric_text = metrics.str();
    return ok;
}

// ---------------------------------------------------------------------------
// criterion 5: structural identities, bitwise where floating point allows

bool criterion_structure(std::string& detail) {
    srnn::Rng rng(777);
    srnn::Image<double> x(5, 7, 2);
    rng.fill_uniform(x.data(), -1.0, 1.0);

    // involutions
    if (!(srnn::transpose_hw(srnn::transpose_hw(x)) == x)) {
        detail = "transpose is not an involution";
        return false;
    }
    if (!(srnn::flip_w(srnn::flip_w(x)) == x)) {
        detail = "horizontal flip is not an involution";
        return false;
    }

    auto params = srnn::make_srnn_params<double>(2, 3, 4);
    srnn::init_rnn_cell(params.row_cell, rng);
    srnn::init_rnn_cell(params.col_cell, rng);
    rng.fill_uniform(params.row_cell.b_ih, -0.2, 0.2);
    rng.fill_uniform(params.col_cell.b_hh, -0.2, 0.2);

    // two-pass layer == row scan, transpose, row scan, transpose
    const auto composed = srnn::transpose_hw(
        srnn::rnn_rows(params.col_cell,
                       srnn::transpose_hw(srnn::rnn_rows(params.row_cell, x).output))
            .output);
    if (!(srnn::srnn(params, x).output == composed)) {
        detail = "two-pass layer differs from its manual composition";
        return false;
    }
    const auto bidi_composed = srnn::transpose_hw(
        srnn::ws_birnn_rows(params.col_cell,
                            srnn::transpose_hw(srnn::ws_birnn_rows(params.row_cell, x).output))
            .output);
    if (!(srnn::sws_birnn(params, x).output == bidi_composed)) {
        detail = "bidirectional two-pass layer differs from its manual composition";
        return false;
    }

    // weight-shared bidirectional scan == forward scan + flipped scan of the
    // flipped input, same cell
    const auto naive = srnn::add(
        srnn::rnn_rows(params.row_cell, x).output,
        srnn::flip_w(srnn::rnn_rows(params.row_cell, srnn::flip_w(x)).output));
    if (!(srnn::ws_birnn_rows(params.row_cell, x).output == naive)) {
        detail = "bidirectional scan differs from the naive tied-weight reference";
        return false;
    }

    // full 2D recurrence with the vertical weights zeroed collapses to the
    // row scan (single bias carried by the input-side bias)
    auto rnn = srnn::make_rnn_cell<double>(2, 3);
    srnn::init_rnn_cell(rnn, rng);
    rng.fill_uniform(rnn.b_ih, -0.3, 0.3);
    auto cell2d = srnn::make_rnn2d_cell<double>(2, 3);
    cell2d.w_ih = rnn.w_ih;
    cell2d.w_hk = rnn.w_hh;
    cell2d.b = rnn.b_ih;
    const auto from_rows = srnn::rnn_rows(rnn, x).output;
    const auto from_2d = srnn::rnn2d(cell2d, x).output;
    for (std::size_t i = 0; i < from_rows.size(); ++i)
        if (std::abs(from_rows.data()[i] - from_2d.data()[i]) > 1e-12) {
            detail = "2D recurrence with zero vertical weights differs from the row scan";
            return false;
        }
    return true;
}

// ---------------------------------------------------------------------------
// criterion 6: the bar classifier trains to >= 95% held out, and the model
// can drive a single example's loss under 0.01

const char* kBarsModelText =
    "input.h = 16\n"
    "input.w = 16\n"
    "input.c = 1\n"
    "classes = 2\n"
    "layer.0 = conv\n"
    "layer.0.out_channels = 8\n"
    "layer.0.k = 3\n"
    "layer.0.stride = 2\n"
    "layer.1 = conv\n"
    "layer.1.out_channels = 16\n"
    "layer.1.k = 3\n"
    "layer.1.stride = 2\n"
    "layer.2 = sws_birnn\n"
    "layer.2.mid_channels = 16\n"
    "layer.2.out_channels = 16\n"
    "layer.3 = gap\n"
    "layer.4 = fc\n";

struct BarsOutcome {
    bool ok = false;
    double holdout_acc = 0.0;
    double overfit_loss = 0.0;
    std::string metrics_text;  // per-epoch CSV plus the overfit trace
    std::string detail;
};

BarsOutcome run_bars_fixture() {
    BarsOutcome out;
    const srnn::ModelConfig mcfg = srnn::parse_model_config_text(kBarsModelText, "bars");
    const srnn::TrainConfig tcfg;  // lr 0.05, momentum 0.9, batch 32, 20 epochs, seed 1

    std::vector<srnn::LabeledImage<float>> data = srnn::make_synthetic_dataset<float>(2000, 1);
    std::vector<srnn::LabeledImage<float>> holdout(data.begin() + 1600, data.end());
    data.resize(1600);

    srnn::Model<float> model = srnn::build_model<float>(mcfg);
    srnn::Rng rng(tcfg.seed);
    srnn::init_model(model, rng);
    const std::vector<srnn::EpochMetrics> metrics = srnn::train(model, data, holdout, tcfg);
    out.holdout_acc = metrics.back().accuracy;

    // one example, batch 1: enough updates to pin the loss near zero
    srnn::Model<float> single = srnn::build_model<float>(mcfg);
    srnn::Rng rng2(tcfg.seed);
    srnn::init_model(single, rng2);
    const std::vector<srnn::LabeledImage<float>> two = srnn::make_synthetic_dataset<float>(2, 1);
    const std::vector<srnn::LabeledImage<float>> one(two.begin(), two.begin() + 1);
    srnn::TrainConfig ocfg;
    ocfg.batch = 1;
    ocfg.epochs = 400;
    const std::vector<srnn::EpochMetrics> overfit = srnn::train(single, one, one, ocfg);
    out.overfit_loss = overfit.back().loss;

    std::ostringstream text;
    text.precision(std::numeric_limits<double>::max_digits10);
    text << "epoch,loss,accuracy\n";
    for (const srnn::EpochMetrics& m : metrics)
        text << m.epoch << "," << m.loss << "," << m.accuracy << "\n";
    text << "overfit_final_loss," << out.overfit_loss << ",\n";
    out.metrics_text = text.str();

    out.ok = out.holdout_acc >= 0.95 && out.overfit_loss < 0.01;
    if (!out.ok)
        out.detail = "holdout accuracy " + std::to_string(out.holdout_acc) +
                     ", overfit loss " + std::to_string(out.overfit_loss);
    return out;
}

// ---------------------------------------------------------------------------
// criterion 7: two epochs on a 2000-image CIFAR-100-format subset strictly
// decrease the training loss; real binaries via SRNNKIT_CIFAR100, otherwise a
// generated file in the same binary layout

const char* kCifarModelText =
    "input.h = 32\n"
    "input.w = 32\n"
    "input.c = 3\n"
    "classes = 100\n"
    "layer.0 = conv\n"
    "layer.0.out_channels = 8\n"
    "layer.0.k = 3\n"
    "layer.0.stride = 2\n"
    "layer.1 = conv\n"
    "layer.1.out_channels = 16\n"
    "layer.1.k = 3\n"
    "layer.1.stride = 2\n"
    "layer.2 = sws_birnn\n"
    "layer.2.mid_channels = 16\n"
    "layer.2.out_channels = 16\n"
    "layer.3 = gap\n"
    "layer.4 = fc\n";

bool criterion_cifar(std::string& detail) {
    std::vector<srnn::LabeledImage<float>> data;
    const char* env = std::getenv("SRNNKIT_CIFAR100");
    if (env && *env) {
        data = srnn::load_cifar<float>(env, srnn::CifarVariant::Cifar100, 2000);
        detail = "real data";
    } else {
        // same record layout, brightness encodes the fine label so the loss
        // has something to descend
        const fs::path path = g_work / "generated_cifar100.bin";
        {
            std::ofstream os(path, std::ios::binary);
            srnn::Rng rng(7);
            for (int i = 0; i < 2000; ++i) {
                const int fine = i % 100;
                srnn::Image<float> img(32, 32, 3);
                for (float& v : img.data())
                    v = std::clamp(
                        (2.0f * static_cast<float>(fine) + static_cast<float>(rng.uniform(0.0, 55.0))) /
                            255.0f,
                        0.0f, 1.0f);
                srnn::write_cifar_record(os, srnn::CifarVariant::Cifar100, {fine / 5, fine},
                                         img);
            }
        }
        data = srnn::load_cifar<float>(path.string(), srnn::CifarVariant::Cifar100, 2000);
        detail = "generated data";
    }

    const srnn::ModelConfig mcfg = srnn::parse_model_config_text(kCifarModelText, "cifar-smoke");
    srnn::TrainConfig tcfg;
    tcfg.epochs = 2;
    tcfg.lr = 0.01;
    srnn::Model<float> model = srnn::build_model<float>(mcfg);
    srnn::Rng rng(tcfg.seed);
    srnn::init_model(model, rng);
    const std::vector<srnn::EpochMetrics> metrics =
        srnn::train(model, data, std::vector<srnn::LabeledImage<float>>{}, tcfg);
    std::ostringstream d;
    d.precision(6);
    d << detail << ", loss " << metrics[0].loss << " -> " << metrics[1].loss;
    detail = d.str();
    return metrics[1].loss < metrics[0].loss;
}

// ---------------------------------------------------------------------------

struct Reporter {
    int failures = 0;
    void line(int idx, const std::string& name, bool ok, const std::string& note) {
        std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << idx << ": " << name;
        if (!note.empty()) std::cout << "  [" << note << "]";
        std::cout << "\n" << std::flush;
        if (!ok) ++failures;
    }
};

template <typename Fn>
bool guarded(Fn&& fn, std::string& note) {
    try {
        return fn();
    } catch (const std::exception& e) {
        note = std::string("exception: ") + e.what();
        return false;
    }
}

}  // namespace

int main() {
    std::error_code ec;
    fs::remove_all(g_work, ec);
    fs::create_directories(g_work);

    Reporter rep;

    {
        std::string note;
        const bool ok = guarded([&] { return criterion_params(note); }, note);
        rep.line(1, "parameter formulas reproduce the reference layer sizes exactly", ok, note);
    }
    {
        std::string note;
        const bool ok = guarded([&] { return criterion_macs(note); }, note);
        rep.line(2, "instrumented MAC counts equal the cost model on the exhaustive grid", ok,
                 note);
    }

    std::string grad_metrics;
    {
        std::string note;
        const bool ok = guarded([&] { return criterion_gradients(grad_metrics, note); }, note);
        write_text(g_work / "gradients_run_a.txt", grad_metrics);
        rep.line(3, "analytic gradients match central differences under 1e-5, all nine kinds",
                 ok, note);
    }

    std::string impulse_metrics;
    {
        std::string note;
        const bool ok = guarded([&] { return criterion_impulse(impulse_metrics, note); }, note);
        write_text(g_work / "impulse_run_a.txt", impulse_metrics);
        rep.line(4, "impulse responses: symmetry, frozen profile, outer-product factorization",
                 ok, note);
    }

    {
        std::string note;
        const bool ok = guarded([&] { return criterion_structure(note); }, note);
        rep.line(5, "structural identities (composition, tied weights, collapse, involutions)",
                 ok, note);
    }

    BarsOutcome bars_a;
    {
        std::string note;
        const bool ok = guarded(
            [&] {
                bars_a = run_bars_fixture();
                note = bars_a.detail;
                if (bars_a.ok) {
                    std::ostringstream d;
                    d.precision(4);
                    d << "holdout accuracy " << bars_a.holdout_acc << ", overfit loss "
                      << bars_a.overfit_loss;
                    note = d.str();
                }
                return bars_a.ok;
            },
            note);
        write_text(g_work / "bars_run_a.csv", bars_a.metrics_text);
        rep.line(6, "bar classifier reaches 95% held out in 20 epochs; overfit-one under 0.01",
                 ok, note);
    }

    {
        std::string note;
        const bool ok = guarded([&] { return criterion_cifar(note); }, note);
        rep.line(7, "two CIFAR-format epochs strictly decrease the training loss", ok, note);
    }

    {
        std::string note;
        const bool ok = guarded(
            [&] {
                std::string grad_b, impulse_b, ignored;
                criterion_gradients(grad_b, ignored);
                criterion_impulse(impulse_b, ignored);
                const BarsOutcome bars_b = run_bars_fixture();
                write_text(g_work / "gradients_run_b.txt", grad_b);
                write_text(g_work / "impulse_run_b.txt", impulse_b);
                write_text(g_work / "bars_run_b.csv", bars_b.metrics_text);
                const bool same_grad = read_text(g_work / "gradients_run_a.txt") ==
                                       read_text(g_work / "gradients_run_b.txt");
                const bool same_impulse = read_text(g_work / "impulse_run_a.txt") ==
                                          read_text(g_work / "impulse_run_b.txt");
                const bool same_bars =
                    read_text(g_work / "bars_run_a.csv") == read_text(g_work / "bars_run_b.csv");
                if (!same_grad) note = "gradient metrics differ between runs";
                else if (!same_impulse) note = "impulse metrics differ between runs";
                else if (!same_bars) note = "training metrics differ between runs";
                return same_grad && same_impulse && same_bars;
            },
            note);
        rep.line(8, "reruns with identical seeds write byte-identical metric files", ok, note);
    }

    return rep.failures == 0 ? 0 : 1;
}

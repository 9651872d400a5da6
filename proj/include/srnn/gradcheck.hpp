#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "srnn/finite_diff.hpp"
#include "srnn/model.hpp"
#include "srnn/rnn2d.hpp"
#include "srnn/rnn_layers.hpp"

// Analytic-vs-finite-difference comparison for every layer kind, reporting
// the max relative error per parameter group (weights, biases, input). The
// scalar loss is a fixed random contraction of the forward output, so every
// output position influences every gradient.

namespace srnn {

enum class GradLayerKind {
    RnnSeq,
    RnnRows,
    Srnn,
    WsBirnnRows,
    SwsBirnn,
    Rnn2d,
    DsRnn,
    Conv2d,
    Dense,
};

inline const char* grad_layer_name(GradLayerKind k) {
    switch (k) {
        case GradLayerKind::RnnSeq: return "rnn_seq";
        case GradLayerKind::RnnRows: return "rnn_rows";
        case GradLayerKind::Srnn: return "srnn";
        case GradLayerKind::WsBirnnRows: return "ws_birnn_rows";
        case GradLayerKind::SwsBirnn: return "sws_birnn";
        case GradLayerKind::Rnn2d: return "rnn2d";
        case GradLayerKind::DsRnn: return "ds_rnn";
        case GradLayerKind::Conv2d: return "conv2d";
        case GradLayerKind::Dense: return "fc";
    }
    return "?";
}

inline GradLayerKind parse_grad_layer(const std::string& s) {
    for (GradLayerKind k :
         {GradLayerKind::RnnSeq, GradLayerKind::RnnRows, GradLayerKind::Srnn,
          GradLayerKind::WsBirnnRows, GradLayerKind::SwsBirnn, GradLayerKind::Rnn2d,
          GradLayerKind::DsRnn, GradLayerKind::Conv2d, GradLayerKind::Dense})
        if (s == grad_layer_name(k)) return k;
    throw std::invalid_argument("unknown layer kind '" + s + "'");
}

struct GradCheckShape {
    int h = 5, w = 6;
    int c_in = 3, c_mid = 4, c_out = 2;
    int k = 3, stride = 1;  // conv only
    bool conv_bias = true;
    bool ds_diag = false;   // ds_rnn diagonal neighbor term
};

struct GroupReport {
    std::string name;
    std::size_t size = 0;
    double max_rel_err = 0.0;
    std::size_t worst_offset = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

struct GradCheckReport {
    GradLayerKind kind = GradLayerKind::RnnSeq;
    Activation act = Activation::Tanh;
    std::uint64_t seed_used = 0;  // differs from the request after kink resampling
    std::size_t coords = 0;
    double max_rel_err = 0.0;
    std::string worst_group;
    std::size_t worst_offset = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::vector<GroupReport> groups;
    double min_abs_preact = std::numeric_limits<double>::infinity();
};

namespace gradcheck_detail {

struct Problem {
    std::vector<double*> coords;
    std::vector<double> analytic;
    std::vector<std::pair<std::string, std::size_t>> group_sizes;
    std::function<double()> loss;

    void add_group(const std::string& name, std::vector<double>& param,
                   const std::vector<double>& grad) {
        for (double& v : param) coords.push_back(&v);
        analytic.insert(analytic.end(), grad.begin(), grad.end());
        group_sizes.emplace_back(name, grad.size());
    }
    void add_group(const std::string& name, Matrix<double>& param, const Matrix<double>& grad) {
        add_group(name, param.data, grad.data);
    }
    void add_group(const std::string& name, Image<double>& param, const Image<double>& grad) {
        add_group(name, param.data(), grad.data());
    }
    void add_group(const std::string& name, Seq<double>& param, const Seq<double>& grad) {
        add_group(name, param.data(), grad.data());
    }
    void add_cell(const std::string& prefix, RnnCell<double>& cell,
                  const CellGrads<double>& g) {
        add_group(prefix + "w_ih", cell.w_ih, g.w_ih);
        add_group(prefix + "w_hh", cell.w_hh, g.w_hh);
        add_group(prefix + "b_ih", cell.b_ih, g.b_ih);
        add_group(prefix + "b_hh", cell.b_hh, g.b_hh);
    }
};

inline double contract(const std::vector<double>& r, const std::vector<double>& v) {
    double s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) s += r[i] * v[i];
    return s;
}

inline double min_abs(const std::vector<double>& v, double acc) {
    for (double x : v) acc = std::min(acc, std::abs(x));
    return acc;
}

// Runs the probes while the closure's referents are still in scope.
inline GradCheckReport measure(Problem& pr, double step) {
    GradCheckReport rep;
    const std::vector<double> fd = finite_diff(pr.coords, pr.loss, step);
    rep.coords = fd.size();
    std::size_t pos = 0;
    for (const auto& [name, size] : pr.group_sizes) {
        GroupReport gr;
        gr.name = name;
        gr.size = size;
        for (std::size_t i = 0; i < size; ++i, ++pos) {
            const double e = grad_rel_err(pr.analytic[pos], fd[pos]);
            if (e > gr.max_rel_err) {
                gr.max_rel_err = e;
                gr.worst_offset = i;
                gr.worst_analytic = pr.analytic[pos];
                gr.worst_numeric = fd[pos];
            }
        }
        if (gr.max_rel_err >= rep.max_rel_err) {
            rep.max_rel_err = gr.max_rel_err;
            rep.worst_group = gr.name;
            rep.worst_offset = gr.worst_offset;
            rep.worst_analytic = gr.worst_analytic;
            rep.worst_numeric = gr.worst_numeric;
        }
        rep.groups.push_back(std::move(gr));
    }
    return rep;
}

inline void randomize_cell(RnnCell<double>& cell, Rng& rng) {
    init_rnn_cell(cell, rng);
    rng.fill_uniform(cell.b_ih, -0.3, 0.3);
    rng.fill_uniform(cell.b_hh, -0.3, 0.3);
}

inline std::vector<double> random_weights(std::size_t n, Rng& rng) {
    std::vector<double> r(n);
    rng.fill_uniform(r, -1.0, 1.0);
    return r;
}

}  // namespace gradcheck_detail

// One instance of one layer kind. Relu callers should inspect
// min_abs_preact and resample (gradcheck_layer below does).
inline GradCheckReport gradcheck_layer_once(GradLayerKind kind, const GradCheckShape& shape,
                                            Activation act, std::uint64_t seed, double step) {
    using namespace gradcheck_detail;
    Rng rng(seed);
    GradCheckReport rep;

    switch (kind) {
        case GradLayerKind::RnnSeq: {
            RnnCell<double> cell = make_rnn_cell<double>(shape.c_in, shape.c_out, act);
            randomize_cell(cell, rng);
            Seq<double> x(shape.w, shape.c_in);
            rng.fill_uniform(x.data(), -1.0, 1.0);
            const SeqResult<double> fwd = rnn_seq(cell, x);
            const std::vector<double> r = random_weights(fwd.output.data().size(), rng);
            Seq<double> d_out(fwd.output.length(), fwd.output.channels());
            d_out.data() = r;
            const SeqGrads<double> g = rnn_seq_backward(cell, fwd.cache, d_out);

            Problem pr;
            pr.add_cell("", cell, g.cell);
            pr.add_group("input", x, g.input);
            pr.loss = [&cell, &x, &r]() { return contract(r, rnn_seq(cell, x).output.data()); };
            rep = measure(pr, step);
            rep.min_abs_preact = min_abs(fwd.cache.preact.data(), rep.min_abs_preact);
            break;
        }
        case GradLayerKind::RnnRows: {
            RnnCell<double> cell = make_rnn_cell<double>(shape.c_in, shape.c_out, act);
            randomize_cell(cell, rng);
            Image<double> x(shape.h, shape.w, shape.c_in);
            rng.fill_uniform(x.data(), -1.0, 1.0);
            const RowsResult<double> fwd = rnn_rows(cell, x);
            const std::vector<double> r = random_weights(fwd.output.size(), rng);
            Image<double> d_out(shape.h, shape.w, shape.c_out, r);
            const RowsGrads<double> g = rnn_rows_backward(cell, fwd.cache, d_out);

            Problem pr;
            pr.add_cell("", cell, g.cell);
            pr.add_group("input", x, g.input);
            pr.loss = [&cell, &x, &r]() { return contract(r, rnn_rows(cell, x).output.data()); };
            rep = measure(pr, step);
            rep.min_abs_preact = min_abs(fwd.cache.preact.data(), rep.min_abs_preact);
            break;
        }
        case GradLayerKind::Srnn:
        case GradLayerKind::SwsBirnn: {
            const bool bidir = kind == GradLayerKind::SwsBirnn;
            SrnnParams<double> p =
                make_srnn_params<double>(shape.c_in, shape.c_mid, shape.c_out, act);
            randomize_cell(p.row_cell, rng);
            randomize_cell(p.col_cell, rng);
            Image<double> x(shape.h, shape.w, shape.c_in);
            rng.fill_uniform(x.data(), -1.0, 1.0);

            Problem pr;
            std::vector<double> r;
            if (bidir) {
                const SwsBirnnResult<double> fwd = sws_birnn(p, x);
                r = random_weights(fwd.output.size(), rng);
                const Image<double> d_out(shape.h, shape.w, shape.c_out, r);
                const SrnnGrads<double> g = sws_birnn_backward(p, fwd.cache, d_out);
                pr.add_cell("row.", p.row_cell, g.row_cell);
                pr.add_cell("col.", p.col_cell, g.col_cell);
                pr.add_group("input", x, g.input);
                for (const RowsCache<double>* rc :
                     {&fwd.cache.row_pass.forward_pass, &fwd.cache.row_pass.backward_pass,
                      &fwd.cache.col_pass.forward_pass, &fwd.cache.col_pass.backward_pass})
                    rep.min_abs_preact = min_abs(rc->preact.data(), rep.min_abs_preact);
                pr.loss = [&p, &x, &r]() { return contract(r, sws_birnn(p, x).output.data()); };
            } else {
                const SrnnResult<double> fwd = srnn(p, x);
                r = random_weights(fwd.output.size(), rng);
                const Image<double> d_out(shape.h, shape.w, shape.c_out, r);
                const SrnnGrads<double> g = srnn_backward(p, fwd.cache, d_out);
                pr.add_cell("row.", p.row_cell, g.row_cell);
                pr.add_cell("col.", p.col_cell, g.col_cell);
                pr.add_group("input", x, g.input);
                for (const RowsCache<double>* rc : {&fwd.cache.row_pass, &fwd.cache.col_pass})
                    rep.min_abs_preact = min_abs(rc->preact.data(), rep.min_abs_preact);
                pr.loss = [&p, &x, &r]() { return contract(r, srnn(p, x).output.data()); };
            }
            const double saved_min = rep.min_abs_preact;
            rep = measure(pr, step);
            rep.min_abs_preact = saved_min;
            break;
        }
        case GradLayerKind::WsBirnnRows: {
            RnnCell<double> cell = make_rnn_cell<double>(shape.c_in, shape.c_out, act);
            randomize_cell(cell, rng);
            Image<double> x(shape.h, shape.w, shape.c_in);
            rng.fill_uniform(x.data(), -1.0, 1.0);
            const WsBirnnResult<double> fwd = ws_birnn_rows(cell, x);
            const std::vector<double> r = random_weights(fwd.output.size(), rng);
            const Image<double> d_out(shape.h, shape.w, shape.c_out, r);
            const RowsGrads<double> g = ws_birnn_rows_backward(cell, fwd.cache, d_out);

            Problem pr;
            pr.add_cell("", cell, g.cell);
            pr.add_group("input", x, g.input);
            pr.loss = [&cell, &x, &r]() {
                return contract(r, ws_birnn_rows(cell, x).output.data());
            };
            rep = measure(pr, step);
            rep.min_abs_preact = min_abs(fwd.cache.forward_pass.preact.data(),
                                         rep.min_abs_preact);
            rep.min_abs_preact = min_abs(fwd.cache.backward_pass.preact.data(),
                                         rep.min_abs_preact);
            break;
        }
        case GradLayerKind::Rnn2d: {
            Rnn2dCell<double> cell = make_rnn2d_cell<double>(shape.c_in, shape.c_out, act);
            init_rnn2d_cell(cell, rng);
            rng.fill_uniform(cell.b, -0.3, 0.3);
            Image<double> x(shape.h, shape.w, shape.c_in);
            rng.fill_uniform(x.data(), -1.0, 1.0);
            const Rnn2dResult<double> fwd = rnn2d(cell, x);
            const std::vector<double> r = random_weights(fwd.output.size(), rng);
            const Image<double> d_out(shape.h, shape.w, shape.c_out, r);
            const Rnn2dGrads<double> g = rnn2d_backward(cell, fwd.cache, d_out);

            Problem pr;
            pr.add_group("w_ih", cell.w_ih, g.w_ih);
            pr.add_group("w_hk", cell.w_hk, g.w_hk);
            pr.add_group("w_hj", cell.w_hj, g.w_hj);
            pr.add_group("w_jk", cell.w_jk, g.w_jk);
            pr.add_group("b", cell.b, g.b);
            pr.add_group("input", x, g.input);
            pr.loss = [&cell, &x, &r]() { return contract(r, rnn2d(cell, x).output.data()); };
            rep = measure(pr, step);
            rep.min_abs_preact = min_abs(fwd.cache.preact.data(), rep.min_abs_preact);
            break;
        }
        case GradLayerKind::DsRnn: {
            DsRnnParams<double> p =
                make_ds_rnn_params<double>(shape.c_in, shape.c_out, act, shape.ds_diag);
            init_ds_rnn_params(p, rng);
            rng.fill_uniform(p.b, -0.3, 0.3);
            Image<double> x(shape.h, shape.w, shape.c_in);
            rng.fill_uniform(x.data(), -1.0, 1.0);
            const DsRnnResult<double> fwd = ds_rnn(p, x);
            const std::vector<double> r = random_weights(fwd.output.size(), rng);
            const Image<double> d_out(shape.h, shape.w, shape.c_out, r);
            const DsRnnGrads<double> g = ds_rnn_backward(p, fwd.cache, d_out);

            Problem pr;
            pr.add_group("w_ih", p.w_ih, g.w_ih);
            pr.add_group("w_a", p.w_a, g.w_a);
            pr.add_group("w_b", p.w_b, g.w_b);
            if (p.has_diag) pr.add_group("w_c", p.w_c, g.w_c);
            pr.add_group("b", p.b, g.b);
            pr.add_group("pointwise", p.pointwise, g.pointwise);
            pr.add_group("input", x, g.input);
            pr.loss = [&p, &x, &r]() { return contract(r, ds_rnn(p, x).output.data()); };
            rep = measure(pr, step);
            rep.min_abs_preact = min_abs(fwd.cache.preact.data(), rep.min_abs_preact);
            break;
        }
        case GradLayerKind::Conv2d: {
            Conv2dParams<double> p = make_conv2d<double>(shape.c_in, shape.c_out, shape.k,
                                                         shape.stride, act, shape.conv_bias);
            init_conv2d(p, rng);
            if (p.has_bias) rng.fill_uniform(p.b, -0.3, 0.3);
            Image<double> x(shape.h, shape.w, shape.c_in);
            rng.fill_uniform(x.data(), -1.0, 1.0);
            const Conv2dResult<double> fwd = conv2d(p, x);
            const std::vector<double> r = random_weights(fwd.output.size(), rng);
            const Image<double> d_out(fwd.output.height(), fwd.output.width(),
                                      fwd.output.channels(), r);
            const Conv2dGrads<double> g = conv2d_backward(p, fwd.cache, d_out);

            Problem pr;
            pr.add_group("w", p.w, g.w);
            if (p.has_bias) pr.add_group("b", p.b, g.b);
            pr.add_group("input", x, g.input);
            pr.loss = [&p, &x, &r]() { return contract(r, conv2d(p, x).output.data()); };
            rep = measure(pr, step);
            rep.min_abs_preact = min_abs(fwd.cache.preact.data(), rep.min_abs_preact);
            break;
        }
        case GradLayerKind::Dense: {
            DenseParams<double> p = make_dense<double>(shape.c_in, shape.c_out);
            init_dense(p, rng);
            rng.fill_uniform(p.b, -0.3, 0.3);
            std::vector<double> x(static_cast<std::size_t>(shape.c_in));
            rng.fill_uniform(x, -1.0, 1.0);
            const std::vector<double> y = dense_forward(p, std::span<const double>(x));
            const std::vector<double> r = random_weights(y.size(), rng);
            const DenseGrads<double> g =
                dense_backward(p, std::span<const double>(x), std::span<const double>(r));

            Problem pr;
            pr.add_group("w", p.w, g.w);
            pr.add_group("b", p.b, g.b);
            pr.add_group("input", x, g.input);
            pr.loss = [&p, &x, &r]() {
                return contract(r, dense_forward(p, std::span<const double>(x)));
            };
            rep = measure(pr, step);
            break;
        }
    }
    rep.kind = kind;
    rep.act = act;
    rep.seed_used = seed;
    return rep;
}

// Resamples relu instances whose pre-activations come within 1e-3 of the
// kink, where central differences straddle the non-differentiable point.
inline GradCheckReport gradcheck_layer(GradLayerKind kind, const GradCheckShape& shape,
                                       Activation act, std::uint64_t seed,
                                       double step = 1e-5) {
    constexpr double kKinkMargin = 1e-3;
    constexpr int kMaxAttempts = 64;
    std::uint64_t s = seed;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt, s += 7919) {
        GradCheckReport rep = gradcheck_layer_once(kind, shape, act, s, step);
        if (act != Activation::Relu || rep.min_abs_preact > kKinkMargin) return rep;
    }
    throw std::runtime_error(std::string("gradcheck: no kink-free relu instance found for ") +
                             grad_layer_name(kind));
}

// End-to-end check of the training stack: conv -> bidirectional recurrent
// layer -> pool -> fc under softmax cross-entropy.
inline GradCheckReport gradcheck_crnn(std::uint64_t seed, double step = 1e-5) {
    using namespace gradcheck_detail;
    ModelConfig cfg;
    cfg.in_h = 6;
    cfg.in_w = 5;
    cfg.in_c = 2;
    cfg.classes = 3;
    LayerConfig conv;
    conv.kind = HarnessLayerKind::Conv;
    conv.out_channels = 3;
    conv.k = 3;
    conv.stride = 2;
    conv.act = Activation::Tanh;
    LayerConfig rnn;
    rnn.kind = HarnessLayerKind::SwsBirnn;
    rnn.mid_channels = 3;
    rnn.out_channels = 4;
    rnn.act = Activation::Tanh;
    LayerConfig gap;
    gap.kind = HarnessLayerKind::Gap;
    LayerConfig fc;
    fc.kind = HarnessLayerKind::Dense;
    cfg.layers = {conv, rnn, gap, fc};

    Model<double> m = build_model<double>(cfg);
    Rng rng(seed);
    init_model(m, rng);
    Image<double> x(cfg.in_h, cfg.in_w, cfg.in_c);
    rng.fill_uniform(x.data(), -1.0, 1.0);
    const int label = 1;

    const ModelForward<double> fwd = model_forward(m, x);
    const SoftmaxResult<double> sm =
        softmax_cross_entropy(std::span<const double>(fwd.logits), label);
    ModelGrads<double> g = model_backward(m, fwd, std::span<const double>(sm.d_logits));

    Problem pr;
    std::vector<double*> param_ptrs;
    collect_model_ptrs(m, param_ptrs);
    std::vector<double*> grad_ptrs;
    flatten_model_grads(m, g, grad_ptrs);
    if (param_ptrs.size() != grad_ptrs.size())
        throw std::logic_error("gradcheck_crnn: parameter/gradient layout mismatch");
    pr.coords = param_ptrs;
    for (double* gp : grad_ptrs) pr.analytic.push_back(*gp);
    pr.group_sizes.emplace_back("model", param_ptrs.size());
    for (double& v : x.data()) pr.coords.push_back(&v);
    for (const double& v : g.input.data()) pr.analytic.push_back(v);
    pr.group_sizes.emplace_back("input", x.data().size());
    pr.loss = [&m, &x, label]() {
        const ModelForward<double> f = model_forward(m, x);
        return static_cast<double>(
            softmax_cross_entropy(std::span<const double>(f.logits), label).loss);
    };
    GradCheckReport rep = measure(pr, step);
    rep.kind = GradLayerKind::Conv2d;  // composite; kind is informational here
    rep.act = Activation::Tanh;
    rep.seed_used = seed;
    return rep;
}

}  // namespace srnn

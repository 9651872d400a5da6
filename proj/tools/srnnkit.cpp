// Command-line surface for the layer kit: impulse-response imaging, cost
// reports, gradient checking, and the toy training/evaluation harness.
// Exit codes: 0 success, 1 numeric check or accuracy failure, 2 usage or
// parse error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "srnn/dataset.hpp"
#include "srnn/gradcheck.hpp"
#include "srnn/impulse.hpp"
#include "srnn/model.hpp"
#include "srnn/model_file.hpp"
#include "srnn/params_io.hpp"
#include "srnn/pgm.hpp"
#include "srnn/tensor_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

// ---------------------------------------------------------------------------
// impulse

struct ImpulseArgs {
    std::vector<std::string> layers{"rnn_rows", "srnn", "ws_birnn", "sws_birnn"};
    std::string params_file;
    std::string preset = "decay0.5";
    int height = 16;
    int width = 9;
    std::vector<std::string> at;  // "j,k" entries
    std::string out_prefix = "impulse";
};

// 1-based row,col on the command line; the library indexes from 0
srnn::ImpulsePoint parse_at(const std::string& s) {
    const auto comma = s.find(',');
    srnn::ImpulsePoint p;
    try {
        if (comma == std::string::npos) throw std::invalid_argument("");
        std::size_t used = 0;
        p.j = std::stoi(s.substr(0, comma), &used);
        if (used != comma) throw std::invalid_argument("");
        const std::string rest = s.substr(comma + 1);
        p.k = std::stoi(rest, &used);
        if (used != rest.size()) throw std::invalid_argument("");
    } catch (...) {
        throw std::invalid_argument("--at wants 'row,col' (1-based), got '" + s + "'");
    }
    p.j -= 1;
    p.k -= 1;
    return p;
}

int run_impulse(const ImpulseArgs& args) {
    std::vector<srnn::ImpulsePoint> points;
    if (args.at.empty()) {
        // two impulses on the default canvas
        points.push_back({args.height / 4, args.width / 4, 0});
        points.push_back({(3 * args.height) / 4, (3 * args.width) / 4, 0});
    } else {
        for (const std::string& s : args.at) points.push_back(parse_at(s));
    }
    const std::span<const srnn::ImpulsePoint> pts(points);

    const bool use_file = !args.params_file.empty();
    if (use_file && args.layers.size() != 1)
        throw std::invalid_argument("--params-file needs exactly one --layer");
    const bool identity = args.preset == "identity";
    if (!identity && args.preset != "decay0.5")
        throw std::invalid_argument("unknown --scalar-preset '" + args.preset +
                                    "' (decay0.5|identity)");

    for (const std::string& layer : args.layers) {
        srnn::Image<double> response;
        if (layer == "rnn_rows" || layer == "ws_birnn") {
            srnn::RnnCell<double> cell;
            if (use_file) {
                std::ifstream is(args.params_file);
                if (!is)
                    throw std::invalid_argument("cannot open params file '" + args.params_file +
                                                "'");
                cell = srnn::load_rnn_cell<double>(is);
            } else {
                cell = identity ? srnn::identity_cell<double>() : srnn::decay_half_cell<double>();
            }
            response = layer == "rnn_rows"
                           ? srnn::impulse_response_rnn_rows(cell, args.height, args.width, pts)
                           : srnn::impulse_response_ws_birnn_rows(cell, args.height, args.width,
                                                                  pts);
        } else if (layer == "srnn" || layer == "sws_birnn") {
            srnn::SrnnParams<double> params;
            if (use_file) {
                std::ifstream is(args.params_file);
                if (!is)
                    throw std::invalid_argument("cannot open params file '" + args.params_file +
                                                "'");
                params = srnn::load_srnn<double>(is);
            } else {
                params = identity ? srnn::identity_srnn<double>()
                                  : srnn::decay_half_srnn<double>();
            }
            response = layer == "srnn"
                           ? srnn::impulse_response_srnn(params, args.height, args.width, pts)
                           : srnn::impulse_response_sws_birnn(params, args.height, args.width,
                                                              pts);
        } else if (layer == "rnn2d") {
            srnn::Rnn2dCell<double> cell;
            if (use_file) {
                std::ifstream is(args.params_file);
                if (!is)
                    throw std::invalid_argument("cannot open params file '" + args.params_file +
                                                "'");
                cell = srnn::load_rnn2d<double>(is);
            } else {
                cell = identity ? srnn::identity_rnn2d<double>()
                                : srnn::decay_half_rnn2d<double>();
            }
            response = srnn::impulse_response_rnn2d(cell, args.height, args.width, pts);
        } else if (layer == "ds_rnn") {
            srnn::DsRnnParams<double> params;
            if (use_file) {
                std::ifstream is(args.params_file);
                if (!is)
                    throw std::invalid_argument("cannot open params file '" + args.params_file +
                                                "'");
                params = srnn::load_ds_rnn<double>(is);
            } else {
                params = identity ? srnn::identity_ds_rnn<double>()
                                 : srnn::decay_half_ds_rnn<double>();
            }
            response = srnn::impulse_response_ds_rnn(params, args.height, args.width, pts);
        } else {
            throw std::invalid_argument(
                "unknown --layer '" + layer +
                "' (rnn_rows|srnn|ws_birnn|sws_birnn|rnn2d|ds_rnn)");
        }

        const std::vector<double> field = srnn::field_of(response);
        const std::string base = args.out_prefix + "_" + layer;
        const srnn::PgmNorm norm =
            srnn::write_pgm_with_sidecar(base + ".pgm", field, args.height, args.width);
        srnn::write_csv_grid(base + ".csv", field, args.height, args.width);
        std::cout << base << ".pgm  " << args.height << "x" << args.width << "  min " << norm.lo
                  << "  max " << norm.hi << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// cost

int run_cost(const std::string& model_path, bool csv, bool compare) {
    const srnn::ModelDesc desc = srnn::parse_model_file(model_path);
    const srnn::CostReport rep = srnn::build_cost_report(desc);
    if (csv) {
        std::cout << srnn::format_report_csv(rep);
        if (compare) {
            std::cout << "substitution_index,conv_params,rnn_params,delta_params,conv_macs,"
                         "rnn_macs\n";
            for (const srnn::SubstitutionDelta& d : rep.substitutions)
                std::cout << d.index << ',' << d.conv_params << ',' << d.rnn_params << ','
                          << (d.rnn_params - d.conv_params) << ',' << d.conv_macs << ','
                          << d.rnn_macs << "\n";
        }
    } else {
        std::cout << srnn::format_report_text(rep, compare);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// gradcheck

int run_gradcheck(const std::vector<std::string>& layer_names, const std::string& shape_str,
                  const std::string& act_name, std::uint64_t seed, double tol) {
    srnn::GradCheckShape shape;
    if (!shape_str.empty()) {
        int vals[5];
        std::istringstream is(shape_str);
        std::string tok;
        int i = 0;
        while (std::getline(is, tok, ',')) {
            if (i >= 5) throw std::invalid_argument("--shape wants h,w,c_in,c_mid,c_out");
            vals[i++] = std::stoi(tok);
        }
        if (i != 5) throw std::invalid_argument("--shape wants h,w,c_in,c_mid,c_out");
        shape.h = vals[0];
        shape.w = vals[1];
        shape.c_in = vals[2];
        shape.c_mid = vals[3];
        shape.c_out = vals[4];
    }
    const srnn::Activation act = srnn::parse_activation(act_name);

    std::vector<srnn::GradLayerKind> kinds;
    if (layer_names.empty()) {
        kinds = {srnn::GradLayerKind::RnnSeq,      srnn::GradLayerKind::RnnRows,
                 srnn::GradLayerKind::Srnn,        srnn::GradLayerKind::WsBirnnRows,
                 srnn::GradLayerKind::SwsBirnn,    srnn::GradLayerKind::Rnn2d,
                 srnn::GradLayerKind::DsRnn,       srnn::GradLayerKind::Conv2d,
                 srnn::GradLayerKind::Dense};
    } else {
        for (const std::string& n : layer_names) kinds.push_back(srnn::parse_grad_layer(n));
    }

    bool all_ok = true;
    std::cout.precision(6);
    for (const srnn::GradLayerKind kind : kinds) {
        const srnn::GradCheckReport rep = srnn::gradcheck_layer(kind, shape, act, seed);
        std::cout << "layer " << srnn::grad_layer_name(kind) << "  act "
                  << srnn::activation_name(rep.act) << "  seed " << rep.seed_used << "  coords "
                  << rep.coords << "\n";
        for (const srnn::GroupReport& g : rep.groups)
            std::cout << "  group " << g.name << "  max_rel_err " << std::scientific
                      << g.max_rel_err << std::defaultfloat << "\n";
        const bool ok = rep.max_rel_err < tol;
        if (!ok) {
            std::cout << "  FAIL worst: group " << rep.worst_group << " offset "
                      << rep.worst_offset << " analytic " << rep.worst_analytic << " numeric "
                      << rep.worst_numeric << " rel_err " << std::scientific << rep.max_rel_err
                      << std::defaultfloat << "\n";
            all_ok = false;
        }
    }
    std::cout << (all_ok ? "gradcheck pass" : "gradcheck FAIL") << " (tol " << tol << ")\n";
    return all_ok ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// train / eval

struct DataArgs {
    std::string kind = "synthetic";
    std::string path;
    int synthetic_n = 2000;
    std::uint64_t synthetic_seed = 1;
    std::int64_t limit = -1;
};

template <std::floating_point T>
std::vector<srnn::LabeledImage<T>> load_data(const DataArgs& d) {
    if (d.kind == "synthetic")
        return srnn::make_synthetic_dataset<T>(d.synthetic_n, d.synthetic_seed);
    if (d.kind == "cifar10" || d.kind == "cifar100") {
        if (d.path.empty())
            throw std::invalid_argument("--data " + d.kind + " needs --data-path");
        return srnn::load_cifar<T>(d.path,
                                   d.kind == "cifar10" ? srnn::CifarVariant::Cifar10
                                                       : srnn::CifarVariant::Cifar100,
                                   d.limit);
    }
    throw std::invalid_argument("unknown --data '" + d.kind +
                                "' (synthetic|cifar10|cifar100)");
}

// deterministic tail split; the synthetic generator alternates labels, so
// both parts stay balanced
template <std::floating_point T>
void split_holdout(std::vector<srnn::LabeledImage<T>>& data,
                   std::vector<srnn::LabeledImage<T>>& holdout, double frac) {
    const std::size_t keep =
        data.size() - static_cast<std::size_t>(static_cast<double>(data.size()) * frac);
    holdout.assign(data.begin() + static_cast<std::ptrdiff_t>(keep), data.end());
    data.resize(keep);
}

template <std::floating_point T>
int run_train_typed(const srnn::ModelConfig& mcfg, const srnn::TrainConfig& tcfg,
                    const DataArgs& dargs, const std::string& out_params,
                    const std::string& metrics_path) {
    std::vector<srnn::LabeledImage<T>> data = load_data<T>(dargs);
    std::vector<srnn::LabeledImage<T>> holdout;
    split_holdout(data, holdout, 0.2);

    srnn::Model<T> model = srnn::build_model<T>(mcfg);
    srnn::Rng rng(tcfg.seed);
    srnn::init_model(model, rng);

    const std::vector<srnn::EpochMetrics> metrics = srnn::train(model, data, holdout, tcfg);
    for (const srnn::EpochMetrics& m : metrics)
        std::cout << "epoch " << m.epoch << "  loss " << m.loss << "  holdout_acc "
                  << m.accuracy << "\n";
    if (!out_params.empty()) srnn::save_model_file(out_params, model);
    if (!metrics_path.empty()) srnn::write_metrics_csv(metrics_path, metrics);
    return kExitOk;
}

int run_train(const std::string& model_cfg_path, const std::string& train_cfg_path,
              const DataArgs& dargs, const std::string& out_params,
              const std::string& metrics_path) {
    const srnn::ModelConfig mcfg = srnn::parse_model_config_file(model_cfg_path);
    srnn::TrainConfig tcfg;
    if (!train_cfg_path.empty()) tcfg = srnn::parse_train_config_file(train_cfg_path);
    if (tcfg.precision == srnn::Precision::Double)
        return run_train_typed<double>(mcfg, tcfg, dargs, out_params, metrics_path);
    return run_train_typed<float>(mcfg, tcfg, dargs, out_params, metrics_path);
}

template <std::floating_point T>
int run_eval_typed(srnn::Model<T> model, const DataArgs& dargs) {
    const std::vector<srnn::LabeledImage<T>> data = load_data<T>(dargs);
    const srnn::EvalResult r = srnn::evaluate(model, data);
    std::cout << "examples " << data.size() << "  accuracy " << r.accuracy << "\n";
    std::cout << "confusion (row = true, col = predicted)\n";
    for (int t = 0; t < r.classes; ++t) {
        for (int p = 0; p < r.classes; ++p) std::cout << (p ? " " : "") << r.at(t, p);
        std::cout << "\n";
    }
    return kExitOk;
}

int run_eval(const std::string& model_cfg_path, const std::string& params_path,
             std::uint64_t seed, const std::string& precision, const DataArgs& dargs) {
    const bool use_double = precision == "double";
    if (!params_path.empty()) {
        if (use_double) return run_eval_typed<double>(srnn::load_model_file<double>(params_path),
                                                      dargs);
        return run_eval_typed<float>(srnn::load_model_file<float>(params_path), dargs);
    }
    if (model_cfg_path.empty())
        throw std::invalid_argument("eval needs --params or --model");
    const srnn::ModelConfig mcfg = srnn::parse_model_config_file(model_cfg_path);
    srnn::Rng rng(seed);
    if (use_double) {
        srnn::Model<double> m = srnn::build_model<double>(mcfg);
        srnn::init_model(m, rng);
        return run_eval_typed<double>(std::move(m), dargs);
    }
    srnn::Model<float> m = srnn::build_model<float>(mcfg);
    srnn::init_model(m, rng);
    return run_eval_typed<float>(std::move(m), dargs);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D-recurrent layer kit: impulse imaging, cost reports, gradient checks, "
                 "toy CRNN training"};
    app.require_subcommand(1);

    // impulse
    ImpulseArgs imp;
    CLI::App* impulse = app.add_subcommand("impulse", "write impulse-response maps");
    impulse->add_option("--layer", imp.layers,
                        "layer kinds (rnn_rows|srnn|ws_birnn|sws_birnn|rnn2d|ds_rnn)");
    impulse->add_option("--params-file", imp.params_file, "layer parameter file");
    impulse->add_option("--scalar-preset", imp.preset, "decay0.5|identity");
    impulse->add_option("--height", imp.height, "canvas height")->check(CLI::PositiveNumber);
    impulse->add_option("--width", imp.width, "canvas width")->check(CLI::PositiveNumber);
    impulse->add_option("--at", imp.at, "impulse position row,col, 1-based (repeatable)");
    impulse->add_option("--out", imp.out_prefix, "output file prefix");

    // cost
    std::string cost_model;
    bool cost_csv = false, cost_compare = false;
    CLI::App* cost = app.add_subcommand("cost", "parameter/MAC report for a model description");
    cost->add_option("--model", cost_model, "model description file")->required();
    cost->add_flag("--csv", cost_csv, "machine-readable output");
    cost->add_flag("--compare", cost_compare, "include conv -> rnn substitution deltas");

    // gradcheck
    std::vector<std::string> gc_layers;
    std::string gc_shape, gc_act = "tanh";
    std::uint64_t gc_seed = 1;
    double gc_tol = 1e-5;
    CLI::App* gradcheck =
        app.add_subcommand("gradcheck", "analytic vs finite-difference gradients");
    gradcheck->add_option("--layer", gc_layers, "layer kinds (default: all)");
    gradcheck->add_option("--shape", gc_shape, "h,w,c_in,c_mid,c_out");
    gradcheck->add_option("--act", gc_act, "tanh|identity|relu");
    gradcheck->add_option("--seed", gc_seed, "instance seed");
    gradcheck->add_option("--tol", gc_tol, "max relative error allowed");

    // train / eval
    std::string tr_model, tr_config, tr_out, tr_metrics;
    DataArgs tr_data;
    CLI::App* train = app.add_subcommand("train", "train a toy classifier");
    train->add_option("--model", tr_model, "model config file")->required();
    train->add_option("--config", tr_config, "train config file");
    train->add_option("--data", tr_data.kind, "synthetic|cifar10|cifar100");
    train->add_option("--data-path", tr_data.path, "CIFAR binary file");
    train->add_option("--n", tr_data.synthetic_n, "synthetic dataset size");
    train->add_option("--data-seed", tr_data.synthetic_seed, "synthetic dataset seed");
    train->add_option("--limit", tr_data.limit, "max records to load");
    train->add_option("--out", tr_out, "write trained parameters here");
    train->add_option("--metrics", tr_metrics, "write per-epoch CSV here");

    std::string ev_model, ev_params, ev_precision = "single";
    std::uint64_t ev_seed = 1;
    DataArgs ev_data;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a model on a dataset");
    eval_cmd->add_option("--model", ev_model, "model config file (fresh init)");
    eval_cmd->add_option("--params", ev_params, "trained parameter file");
    eval_cmd->add_option("--seed", ev_seed, "init seed when no --params");
    eval_cmd->add_option("--precision", ev_precision, "single|double");
    eval_cmd->add_option("--data", ev_data.kind, "synthetic|cifar10|cifar100");
    eval_cmd->add_option("--data-path", ev_data.path, "CIFAR binary file");
    eval_cmd->add_option("--n", ev_data.synthetic_n, "synthetic dataset size");
    eval_cmd->add_option("--data-seed", ev_data.synthetic_seed, "synthetic dataset seed");
    eval_cmd->add_option("--limit", ev_data.limit, "max records to load");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (impulse->parsed()) return run_impulse(imp);
        if (cost->parsed()) return run_cost(cost_model, cost_csv, cost_compare);
        if (gradcheck->parsed())
            return run_gradcheck(gc_layers, gc_shape, gc_act, gc_seed, gc_tol);
        if (train->parsed()) return run_train(tr_model, tr_config, tr_data, tr_out, tr_metrics);
        if (eval_cmd->parsed())
            return run_eval(ev_model, ev_params, ev_seed, ev_precision, ev_data);
    } catch (const srnn::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const srnn::ModelParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const srnn::ParamsIoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitUsage;
}

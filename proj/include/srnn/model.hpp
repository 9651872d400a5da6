#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "srnn/conv2d.hpp"
#include "srnn/dataset.hpp"
#include "srnn/dense.hpp"
#include "srnn/parallel.hpp"
#include "srnn/param_visit.hpp"
#include "srnn/rnn_layers.hpp"

// The toy classifier stack: an ordered layer list (conv / recurrent /
// global-avg-pool / fully-connected) parsed from flat key=value config
// text, with per-example forward/backward, SGD-with-momentum training and
// argmax evaluation. Deterministic for a fixed seed: batch order comes from
// one RNG stream and parallel gradient reduction is by example index.

namespace srnn {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class HarnessLayerKind { Conv, SwsBirnn, Srnn, Gap, Dense };

inline const char* harness_layer_name(HarnessLayerKind k) {
    switch (k) {
        case HarnessLayerKind::Conv: return "conv";
        case HarnessLayerKind::SwsBirnn: return "sws_birnn";
        case HarnessLayerKind::Srnn: return "srnn";
        case HarnessLayerKind::Gap: return "gap";
        case HarnessLayerKind::Dense: return "fc";
    }
    return "?";
}

struct LayerConfig {
    HarnessLayerKind kind = HarnessLayerKind::Conv;
    int out_channels = 0;   // conv / recurrent
    int mid_channels = 0;   // recurrent
    int k = 3;              // conv
    int stride = 1;         // conv
    bool bias = true;       // conv
    int out_features = 0;   // fc; 0 = class count
    Activation act = Activation::Tanh;
};

struct ModelConfig {
    int in_h = 0, in_w = 0, in_c = 0;
    int classes = 0;
    std::vector<LayerConfig> layers;
};

// --------------------------------------------------------------------------
// key=value parsing

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline int to_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("key '" + key + "': integer expected, got '" + value + "'");
    }
}

inline double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("key '" + key + "': number expected, got '" + value + "'");
    }
}

inline bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("key '" + key + "': boolean expected, got '" + value + "'");
}

// `# comment` lines and blanks skipped; everything else must be key = value
inline std::map<std::string, std::string> parse_kv(const std::string& text,
                                                   const std::string& origin) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key or value");
        if (!kv.emplace(key, value).second)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" +
                              key + "'");
    }
    return kv;
}

}  // namespace detail

inline ModelConfig parse_model_config_text(const std::string& text, const std::string& origin) {
    auto kv = detail::parse_kv(text, origin);
    const auto take = [&kv](const std::string& key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    const auto require = [&take, &origin](const std::string& key) {
        auto v = take(key);
        if (!v) throw ConfigError(origin + ": missing key '" + key + "'");
        return *v;
    };

    ModelConfig cfg;
    cfg.in_h = detail::to_int("input.h", require("input.h"));
    cfg.in_w = detail::to_int("input.w", require("input.w"));
    cfg.in_c = detail::to_int("input.c", require("input.c"));
    cfg.classes = detail::to_int("classes", require("classes"));
    if (cfg.in_h < 1 || cfg.in_w < 1 || cfg.in_c < 1)
        throw ConfigError(origin + ": input dimensions must be >= 1");
    if (cfg.classes < 2) throw ConfigError(origin + ": need at least 2 classes");

    for (int i = 0;; ++i) {
        const std::string base = "layer." + std::to_string(i);
        const auto kind_str = take(base);
        if (!kind_str) break;
        LayerConfig lc;
        const auto opt_int = [&](const char* what, int fallback) {
            auto v = take(base + "." + what);
            return v ? detail::to_int(base + "." + what, *v) : fallback;
        };
        if (*kind_str == "conv") {
            lc.kind = HarnessLayerKind::Conv;
            lc.out_channels = opt_int("out_channels", 0);
            lc.k = opt_int("k", 3);
            lc.stride = opt_int("stride", 1);
            lc.act = Activation::Relu;
            if (auto v = take(base + ".act")) lc.act = parse_activation(*v);
            if (auto v = take(base + ".bias")) lc.bias = detail::to_bool(base + ".bias", *v);
            if (lc.out_channels < 1)
                throw ConfigError(base + ": conv needs out_channels >= 1");
            if (lc.k < 1 || lc.k % 2 == 0)
                throw ConfigError(base + ": conv kernel must be odd and >= 1");
            if (lc.stride != 1 && lc.stride != 2)
                throw ConfigError(base + ": conv stride must be 1 or 2");
        } else if (*kind_str == "sws_birnn" || *kind_str == "srnn") {
            lc.kind = *kind_str == "srnn" ? HarnessLayerKind::Srnn : HarnessLayerKind::SwsBirnn;
            lc.mid_channels = opt_int("mid_channels", 0);
            lc.out_channels = opt_int("out_channels", 0);
            lc.act = Activation::Tanh;
            if (auto v = take(base + ".act")) lc.act = parse_activation(*v);
            if (lc.mid_channels < 1 || lc.out_channels < 1)
                throw ConfigError(base + ": recurrent layer needs mid_channels and "
                                         "out_channels >= 1");
        } else if (*kind_str == "gap") {
            lc.kind = HarnessLayerKind::Gap;
        } else if (*kind_str == "fc") {
            lc.kind = HarnessLayerKind::Dense;
            lc.out_features = opt_int("out_features", 0);
        } else {
            throw ConfigError(base + ": unknown layer kind '" + *kind_str + "'");
        }
        cfg.layers.push_back(lc);
    }
    if (!kv.empty()) throw ConfigError(origin + ": unknown key '" + kv.begin()->first + "'");
    if (cfg.layers.empty()) throw ConfigError(origin + ": no layers");

    // exactly one classifier tail: one gap, then only fc, ending in the
    // class count
    int gap_at = -1;
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
        if (cfg.layers[i].kind == HarnessLayerKind::Gap) {
            if (gap_at >= 0) throw ConfigError(origin + ": more than one gap layer");
            gap_at = static_cast<int>(i);
        }
    }
    if (gap_at < 0) throw ConfigError(origin + ": classifier tail needs a gap layer");
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
        const bool is_fc = cfg.layers[i].kind == HarnessLayerKind::Dense;
        if (static_cast<int>(i) < gap_at && is_fc)
            throw ConfigError("layer." + std::to_string(i) + ": fc before gap");
        if (static_cast<int>(i) > gap_at && !is_fc)
            throw ConfigError("layer." + std::to_string(i) + ": only fc layers after gap");
    }
    if (gap_at == static_cast<int>(cfg.layers.size()) - 1)
        throw ConfigError(origin + ": classifier tail needs an fc layer after gap");
    if (cfg.layers.back().out_features == 0) cfg.layers.back().out_features = cfg.classes;
    if (cfg.layers.back().out_features != cfg.classes)
        throw ConfigError(origin + ": last fc out_features " +
                          std::to_string(cfg.layers.back().out_features) + " != classes " +
                          std::to_string(cfg.classes));
    return cfg;
}

inline ModelConfig parse_model_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open model config '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_model_config_text(buf.str(), path);
}

struct TrainConfig {
    double lr = 0.05;
    double momentum = 0.9;
    int batch = 32;
    int epochs = 20;
    std::uint64_t seed = 1;
    Precision precision = Precision::Single;
};

inline TrainConfig parse_train_config_text(const std::string& text, const std::string& origin) {
    auto kv = detail::parse_kv(text, origin);
    TrainConfig cfg;
    const auto take = [&kv](const std::string& key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    if (auto v = take("lr")) cfg.lr = detail::to_double("lr", *v);
    if (auto v = take("momentum")) cfg.momentum = detail::to_double("momentum", *v);
    if (auto v = take("batch")) cfg.batch = detail::to_int("batch", *v);
    if (auto v = take("epochs")) cfg.epochs = detail::to_int("epochs", *v);
    if (auto v = take("seed")) cfg.seed = static_cast<std::uint64_t>(detail::to_int("seed", *v));
    if (auto v = take("precision")) {
        if (*v == "single") cfg.precision = Precision::Single;
        else if (*v == "double") cfg.precision = Precision::Double;
        else throw ConfigError(origin + ": precision must be single|double, got '" + *v + "'");
    }
    if (!kv.empty()) throw ConfigError(origin + ": unknown key '" + kv.begin()->first + "'");
    if (cfg.lr < 0) throw ConfigError(origin + ": lr must be >= 0");
    if (cfg.batch < 1) throw ConfigError(origin + ": batch must be >= 1");
    if (cfg.epochs < 0) throw ConfigError(origin + ": epochs must be >= 0");
    return cfg;
}

inline TrainConfig parse_train_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open train config '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_train_config_text(buf.str(), path);
}

// --------------------------------------------------------------------------
// built model

template <std::floating_point T>
struct RecurrentLayer {
    SrnnParams<T> params;
    bool bidirectional = true;
};

template <std::floating_point T>
struct ModelLayer {
    HarnessLayerKind kind = HarnessLayerKind::Gap;
    std::optional<Conv2dParams<T>> conv;
    std::optional<RecurrentLayer<T>> rnn;
    std::optional<DenseParams<T>> dense;
};

template <std::floating_point T>
struct Model {
    ModelConfig cfg;
    std::vector<ModelLayer<T>> layers;
};

// Builds zero-initialized layers, checking the shape chain; violations name
// the offending layer index.
template <std::floating_point T>
Model<T> build_model(const ModelConfig& cfg) {
    Model<T> m;
    m.cfg = cfg;
    int h = cfg.in_h, w = cfg.in_w, c = cfg.in_c;
    bool pooled = false;
    int features = 0;
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
        const LayerConfig& lc = cfg.layers[i];
        const std::string where = "layer." + std::to_string(i);
        ModelLayer<T> layer;
        layer.kind = lc.kind;
        switch (lc.kind) {
            case HarnessLayerKind::Conv:
                if (pooled) throw ConfigError(where + ": conv after gap");
                layer.conv = make_conv2d<T>(c, lc.out_channels, lc.k, lc.stride, lc.act, lc.bias);
                h = conv_out_extent(h, lc.stride);
                w = conv_out_extent(w, lc.stride);
                c = lc.out_channels;
                break;
            case HarnessLayerKind::SwsBirnn:
            case HarnessLayerKind::Srnn:
                if (pooled) throw ConfigError(where + ": recurrent layer after gap");
                layer.rnn = RecurrentLayer<T>{
                    make_srnn_params<T>(c, lc.mid_channels, lc.out_channels, lc.act),
                    lc.kind == HarnessLayerKind::SwsBirnn};
                c = lc.out_channels;
                break;
            case HarnessLayerKind::Gap:
                pooled = true;
                features = c;
                break;
            case HarnessLayerKind::Dense: {
                const int out = lc.out_features > 0 ? lc.out_features : cfg.classes;
                layer.dense = make_dense<T>(features, out);
                features = out;
                break;
            }
        }
        m.layers.push_back(std::move(layer));
    }
    return m;
}

template <std::floating_point T>
void init_model(Model<T>& m, Rng& rng) {
    for (ModelLayer<T>& layer : m.layers) {
        if (layer.conv) init_conv2d(*layer.conv, rng);
        if (layer.rnn) {
            init_rnn_cell(layer.rnn->params.row_cell, rng);
            init_rnn_cell(layer.rnn->params.col_cell, rng);
        }
        if (layer.dense) init_dense(*layer.dense, rng);
    }
}

// --------------------------------------------------------------------------
// parameter enumeration (update and finite-difference order)

template <std::floating_point T>
void collect_ptrs(Conv2dParams<T>& p, std::vector<T*>& out) {
    collect_ptrs(p.w, out);
    if (p.has_bias) collect_ptrs(p.b, out);
}

template <std::floating_point T>
void collect_ptrs(Conv2dGrads<T>& g, bool has_bias, std::vector<T*>& out) {
    collect_ptrs(g.w, out);
    if (has_bias) collect_ptrs(g.b, out);
}

template <std::floating_point T>
void collect_ptrs(DenseParams<T>& p, std::vector<T*>& out) {
    collect_ptrs(p.w, out);
    collect_ptrs(p.b, out);
}

template <std::floating_point T>
void collect_ptrs(DenseGrads<T>& g, std::vector<T*>& out) {
    collect_ptrs(g.w, out);
    collect_ptrs(g.b, out);
}

template <std::floating_point T>
void collect_model_ptrs(Model<T>& m, std::vector<T*>& out) {
    for (ModelLayer<T>& layer : m.layers) {
        if (layer.conv) collect_ptrs(*layer.conv, out);
        if (layer.rnn) collect_ptrs(layer.rnn->params, out);
        if (layer.dense) collect_ptrs(*layer.dense, out);
    }
}

// --------------------------------------------------------------------------
// forward / backward

template <std::floating_point T>
struct ModelLayerCache {
    std::optional<Conv2dCache<T>> conv;
    std::optional<SrnnCache<T>> srnn_cache;
    std::optional<SwsBirnnCache<T>> sws_cache;
    int gap_h = 0, gap_w = 0;
    std::vector<T> dense_input;
};

template <std::floating_point T>
struct ModelForward {
    std::vector<T> logits;
    std::vector<ModelLayerCache<T>> caches;
};

template <std::floating_point T>
ModelForward<T> model_forward(const Model<T>& m, const Image<T>& x) {
    ModelForward<T> f;
    f.caches.resize(m.layers.size());
    Image<T> img = x;
    std::vector<T> vec;
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const ModelLayer<T>& layer = m.layers[i];
        ModelLayerCache<T>& cache = f.caches[i];
        switch (layer.kind) {
            case HarnessLayerKind::Conv: {
                Conv2dResult<T> r = conv2d(*layer.conv, img);
                img = std::move(r.output);
                cache.conv = std::move(r.cache);
                break;
            }
            case HarnessLayerKind::SwsBirnn: {
                SwsBirnnResult<T> r = sws_birnn(layer.rnn->params, img);
                img = std::move(r.output);
                cache.sws_cache = std::move(r.cache);
                break;
            }
            case HarnessLayerKind::Srnn: {
                SrnnResult<T> r = srnn(layer.rnn->params, img);
                img = std::move(r.output);
                cache.srnn_cache = std::move(r.cache);
                break;
            }
            case HarnessLayerKind::Gap:
                cache.gap_h = img.height();
                cache.gap_w = img.width();
                vec = global_avg_pool(img);
                break;
            case HarnessLayerKind::Dense:
                cache.dense_input = vec;
                vec = dense_forward(*layer.dense, std::span<const T>(vec));
                break;
        }
    }
    f.logits = std::move(vec);
    return f;
}

template <std::floating_point T>
struct ModelLayerGrads {
    std::optional<Conv2dGrads<T>> conv;
    std::optional<SrnnGrads<T>> rnn;
    std::optional<DenseGrads<T>> dense;
};

template <std::floating_point T>
struct ModelGrads {
    std::vector<ModelLayerGrads<T>> layers;
    Image<T> input;
};

template <std::floating_point T>
ModelGrads<T> model_backward(const Model<T>& m, const ModelForward<T>& f,
                             std::span<const T> d_logits) {
    ModelGrads<T> g;
    g.layers.resize(m.layers.size());
    std::vector<T> d_vec(d_logits.begin(), d_logits.end());
    Image<T> d_img;
    for (std::size_t ri = m.layers.size(); ri-- > 0;) {
        const ModelLayer<T>& layer = m.layers[ri];
        const ModelLayerCache<T>& cache = f.caches[ri];
        switch (layer.kind) {
            case HarnessLayerKind::Dense: {
                DenseGrads<T> dg = dense_backward(*layer.dense,
                                                  std::span<const T>(cache.dense_input),
                                                  std::span<const T>(d_vec));
                d_vec = dg.input;
                g.layers[ri].dense = std::move(dg);
                break;
            }
            case HarnessLayerKind::Gap:
                d_img = global_avg_pool_backward(cache.gap_h, cache.gap_w,
                                                 std::span<const T>(d_vec));
                break;
            case HarnessLayerKind::SwsBirnn: {
                SrnnGrads<T> rg = sws_birnn_backward(layer.rnn->params, *cache.sws_cache, d_img);
                d_img = rg.input;
                g.layers[ri].rnn = std::move(rg);
                break;
            }
            case HarnessLayerKind::Srnn: {
                SrnnGrads<T> rg = srnn_backward(layer.rnn->params, *cache.srnn_cache, d_img);
                d_img = rg.input;
                g.layers[ri].rnn = std::move(rg);
                break;
            }
            case HarnessLayerKind::Conv: {
                Conv2dGrads<T> cg = conv2d_backward(*layer.conv, *cache.conv, d_img);
                d_img = cg.input;
                g.layers[ri].conv = std::move(cg);
                break;
            }
        }
    }
    g.input = std::move(d_img);
    return g;
}

// Flattened gradient values in collect_model_ptrs order.
template <std::floating_point T>
void flatten_model_grads(const Model<T>& m, ModelGrads<T>& g, std::vector<T*>& out) {
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const ModelLayer<T>& layer = m.layers[i];
        if (layer.conv) collect_ptrs(*g.layers[i].conv, layer.conv->has_bias, out);
        if (layer.rnn) collect_ptrs(*g.layers[i].rnn, out);
        if (layer.dense) collect_ptrs(*g.layers[i].dense, out);
    }
}

// --------------------------------------------------------------------------
// training

struct EpochMetrics {
    int epoch = 0;
    double loss = 0.0;      // mean example loss over the epoch
    double accuracy = 0.0;  // held-out accuracy after the epoch
};

struct EvalResult {
    double accuracy = 0.0;
    int classes = 0;
    std::vector<std::int64_t> confusion;  // row = true label, col = prediction

    std::int64_t& at(int truth, int pred) {
        return confusion[static_cast<std::size_t>(truth) * classes + pred];
    }
    std::int64_t at(int truth, int pred) const {
        return confusion[static_cast<std::size_t>(truth) * classes + pred];
    }
};

template <std::floating_point T>
EvalResult evaluate(const Model<T>& m, const std::vector<LabeledImage<T>>& data) {
    EvalResult r;
    r.classes = m.cfg.classes;
    r.confusion.assign(static_cast<std::size_t>(r.classes) * r.classes, 0);
    if (data.empty()) return r;
    std::vector<int> pred(data.size());
    parallel_for(static_cast<int>(data.size()), [&](int idx) {
        const std::size_t i = static_cast<std::size_t>(idx);
        const ModelForward<T> f = model_forward(m, data[i].image);
        int best = 0;
        for (std::size_t c = 1; c < f.logits.size(); ++c)
            if (f.logits[c] > f.logits[static_cast<std::size_t>(best)])
                best = static_cast<int>(c);
        pred[i] = best;
    });
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        r.at(data[i].label, pred[i]) += 1;
        if (pred[i] == data[i].label) ++correct;
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    return r;
}

// One epoch order, mini-batches, mean gradient, momentum update. Per-example
// work may run on worker threads; the reduction is always in example-index
// order. Throws on non-finite loss, naming the epoch and batch.
template <std::floating_point T>
std::vector<EpochMetrics> train(Model<T>& m, const std::vector<LabeledImage<T>>& train_data,
                                const std::vector<LabeledImage<T>>& holdout,
                                const TrainConfig& cfg) {
    if (train_data.empty()) throw std::invalid_argument("train: empty dataset");
    for (const LabeledImage<T>& ex : train_data)
        if (ex.label < 0 || ex.label >= m.cfg.classes)
            throw std::invalid_argument("train: label " + std::to_string(ex.label) +
                                        " outside 0.." + std::to_string(m.cfg.classes - 1));

    std::vector<T*> params;
    collect_model_ptrs(m, params);
    std::vector<T> velocity(params.size(), T(0));
    Rng rng(cfg.seed);

    std::vector<std::size_t> order(train_data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<EpochMetrics> metrics;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0, batch_no = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch), ++batch_no) {
            const std::size_t count =
                std::min(static_cast<std::size_t>(cfg.batch), order.size() - start);

            std::vector<std::vector<T>> flat(count);
            std::vector<double> losses(count);
            parallel_for(static_cast<int>(count), [&](int bi) {
                const std::size_t b = static_cast<std::size_t>(bi);
                const LabeledImage<T>& ex = train_data[order[start + b]];
                const ModelForward<T> f = model_forward(m, ex.image);
                const SoftmaxResult<T> sm =
                    softmax_cross_entropy(std::span<const T>(f.logits), ex.label);
                losses[b] = static_cast<double>(sm.loss);
                ModelGrads<T> g = model_backward(m, f, std::span<const T>(sm.d_logits));
                std::vector<T*> gp;
                flatten_model_grads(m, g, gp);
                flat[b].resize(gp.size());
                for (std::size_t j = 0; j < gp.size(); ++j) flat[b][j] = *gp[j];
            });

            // fixed-order reduction keeps training bitwise reproducible
            std::vector<T> grad(params.size(), T(0));
            double batch_loss = 0.0;
            for (std::size_t b = 0; b < count; ++b) {
                batch_loss += losses[b];
                if (flat[b].size() != grad.size())
                    throw std::logic_error("train: gradient layout mismatch");
                for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += flat[b][j];
            }
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(batch_no));
            epoch_loss += batch_loss;

            const T scale = T(1) / static_cast<T>(count);
            const T mu = static_cast<T>(cfg.momentum);
            const T lr = static_cast<T>(cfg.lr);
            for (std::size_t j = 0; j < params.size(); ++j) {
                velocity[j] = mu * velocity[j] - lr * grad[j] * scale;
                *params[j] += velocity[j];
            }
        }
        EpochMetrics em;
        em.epoch = epoch;
        em.loss = epoch_loss / static_cast<double>(train_data.size());
        em.accuracy = holdout.empty() ? 0.0 : evaluate(m, holdout).accuracy;
        metrics.push_back(em);
    }
    return metrics;
}

inline void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& metrics) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open metrics file '" + path + "'");
    os.precision(std::numeric_limits<double>::max_digits10);
    os << "epoch,loss,accuracy\n";
    for (const EpochMetrics& m : metrics)
        os << m.epoch << ',' << m.loss << ',' << m.accuracy << "\n";
    if (!os) throw std::runtime_error("write failure on '" + path + "'");
}

}  // namespace srnn

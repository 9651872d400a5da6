#include <doctest.h>

#include <cmath>
#include <sstream>

#include "srnn/model.hpp"
#include "srnn/params_io.hpp"
#include "srnn/resource_model.hpp"
#include "test_util.hpp"

using srnn::Activation;
using srnn::HarnessLayerKind;
using srnn::Image;

namespace {

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

srnn::ModelConfig tiny_config() {
    srnn::ModelConfig cfg;
    cfg.in_h = 16;
    cfg.in_w = 16;
    cfg.in_c = 1;
    cfg.classes = 2;
    srnn::LayerConfig conv;
    conv.kind = HarnessLayerKind::Conv;
    conv.out_channels = 4;
    conv.k = 3;
    conv.stride = 2;
    conv.act = Activation::Tanh;
    srnn::LayerConfig rnn;
    rnn.kind = HarnessLayerKind::SwsBirnn;
    rnn.mid_channels = 4;
    rnn.out_channels = 4;
    srnn::LayerConfig gap;
    gap.kind = HarnessLayerKind::Gap;
    srnn::LayerConfig fc;
    fc.kind = HarnessLayerKind::Dense;
    cfg.layers = {conv, rnn, gap, fc};
    return cfg;
}

std::vector<double> snapshot(srnn::Model<double>& m) {
    std::vector<double*> ptrs;
    srnn::collect_model_ptrs(m, ptrs);
    std::vector<double> vals(ptrs.size());
    for (std::size_t i = 0; i < ptrs.size(); ++i) vals[i] = *ptrs[i];
    return vals;
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("global average pool averages each channel and spreads its gradient evenly") {
    Image<double> x(4, 4, 2);
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
            x.at(j, k, 0) = 0.5;
            x.at(j, k, 1) = static_cast<double>(j);  // mean 1.5
        }
    const auto y = srnn::global_avg_pool(x);
    REQUIRE(y.size() == 2);
    CHECK(y[0] == 0.5);
    CHECK(y[1] == 1.5);

    const std::vector<double> d_y{1.0, -2.0};
    const auto d_x = srnn::global_avg_pool_backward(4, 4, std::span<const double>(d_y));
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
            CHECK(d_x.at(j, k, 0) == 1.0 / 16.0);
            CHECK(d_x.at(j, k, 1) == -2.0 / 16.0);
        }
}

TEST_CASE("softmax cross-entropy on uniform logits is log of the class count") {
    const std::vector<double> logits(5, 0.7);
    const auto r = srnn::softmax_cross_entropy(std::span<const double>(logits), 2);
    CHECK(std::abs(r.loss - std::log(5.0)) < 1e-12);
    double prob_sum = 0, grad_sum = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(std::abs(r.probs[i] - 0.2) < 1e-12);
        prob_sum += r.probs[i];
        grad_sum += r.d_logits[i];
    }
    CHECK(std::abs(prob_sum - 1.0) < 1e-12);
    CHECK(std::abs(grad_sum) < 1e-12);  // gradient sums to zero
    CHECK(r.d_logits[2] < 0);           // target logit is pushed up

    CHECK_THROWS_AS(srnn::softmax_cross_entropy(std::span<const double>(logits), 5),
                    std::out_of_range);
}

TEST_CASE("softmax is shift-invariant even for large logits") {
    const std::vector<double> logits{1000.0, 1001.0, 999.0};
    const auto r = srnn::softmax_cross_entropy(std::span<const double>(logits), 1);
    const double z = 1.0 + std::exp(-1.0) + std::exp(-2.0);
    CHECK(std::abs(r.probs[1] - 1.0 / z) < 1e-12);
    CHECK(std::isfinite(r.loss));
}

TEST_CASE("1x1 identity convolution passes the image through unchanged") {
    auto p = srnn::make_conv2d<double>(3, 3, 1, 1, Activation::Identity, false);
    for (int c = 0; c < 3; ++c) p.w(c, c) = 1.0;
    const auto x = testutil::random_image<double>(5, 4, 3, 91);
    CHECK(srnn::conv2d(p, x).output == x);
}

TEST_CASE("synthetic bar dataset is balanced, deterministic, and class-consistent") {
    const auto data = srnn::make_synthetic_dataset<double>(100, 7);
    REQUIRE(data.size() == 100);
    int ones = 0;
    for (const auto& ex : data) {
        CHECK(ex.image.height() == 16);
        CHECK(ex.image.width() == 16);
        CHECK(ex.image.channels() == 1);
        ones += ex.label;
    }
    CHECK(ones == 50);
    CHECK(data[0].label == 0);
    CHECK(data[1].label == 1);  // strict alternation keeps any split balanced

    const auto again = srnn::make_synthetic_dataset<double>(100, 7);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(data[i].image == again[i].image);
    const auto other = srnn::make_synthetic_dataset<double>(100, 8);
    bool any_differs = false;
    for (std::size_t i = 0; i < data.size(); ++i)
        any_differs = any_differs || !(data[i].image == other[i].image);
    CHECK(any_differs);

    // orientation self-test: a horizontal bar dominates one row's mean, a
    // vertical bar one column's mean
    for (const auto& ex : data) {
        double best_row = -1e9, best_col = -1e9;
        for (int a = 0; a < 16; ++a) {
            double row_sum = 0, col_sum = 0;
            for (int b = 0; b < 16; ++b) {
                row_sum += ex.image.at(a, b, 0);
                col_sum += ex.image.at(b, a, 0);
            }
            best_row = std::max(best_row, row_sum / 16.0);
            best_col = std::max(best_col, col_sum / 16.0);
        }
        if (ex.label == 0)
            CHECK(best_row > best_col);
        else
            CHECK(best_col > best_row);
    }
}

TEST_CASE("CIFAR-style records round-trip through the binary layout") {
    const std::string dir = testutil::scratch_dir("cifar");
    srnn::Rng rng(3);
    std::vector<Image<double>> imgs;
    std::vector<int> fine_labels{0, 99, 42};
    {
        std::ofstream os(dir + "/train.bin", std::ios::binary);
        for (int i = 0; i < 3; ++i) {
            Image<double> img(32, 32, 3);
            for (double& v : img.data())
                v = static_cast<double>(rng.uniform_int(256)) / 255.0;  // byte-exact values
            srnn::write_cifar_record(os, srnn::CifarVariant::Cifar100,
                                     {5, fine_labels[static_cast<std::size_t>(i)]}, img);
            imgs.push_back(std::move(img));
        }
    }
    const auto data =
        srnn::load_cifar<double>(dir + "/train.bin", srnn::CifarVariant::Cifar100);
    REQUIRE(data.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(data[i].label == fine_labels[i]);  // fine label, not the coarse byte
        CHECK(data[i].image == imgs[i]);
    }
    const auto limited =
        srnn::load_cifar<double>(dir + "/train.bin", srnn::CifarVariant::Cifar100, 2);
    CHECK(limited.size() == 2);
}

TEST_CASE("CIFAR loader rejects truncated files and out-of-range labels") {
    const std::string dir = testutil::scratch_dir("cifar_bad");
    {
        std::ofstream os(dir + "/trunc.bin", std::ios::binary);
        Image<double> img(32, 32, 3);
        srnn::write_cifar_record(os, srnn::CifarVariant::Cifar10, {1}, img);
        os.put('\0');  // half a record
    }
    CHECK_THROWS_WITH_AS(srnn::load_cifar<double>(dir + "/trunc.bin",
                                                  srnn::CifarVariant::Cifar10),
                         doctest::Contains("not a multiple"), std::runtime_error);

    {
        std::ofstream os(dir + "/badlabel.bin", std::ios::binary);
        Image<double> img(32, 32, 3);
        srnn::write_cifar_record(os, srnn::CifarVariant::Cifar10, {250}, img);
    }
    CHECK_THROWS_WITH_AS(srnn::load_cifar<double>(dir + "/badlabel.bin",
                                                  srnn::CifarVariant::Cifar10),
                         doctest::Contains("out of range"), std::runtime_error);
}

TEST_CASE("model config text parses with the documented defaults") {
    const auto cfg = srnn::parse_model_config_text(kBarsModelText, "bars");
    CHECK(cfg.in_h == 16);
    CHECK(cfg.classes == 2);
    REQUIRE(cfg.layers.size() == 5);
    CHECK(cfg.layers[0].kind == HarnessLayerKind::Conv);
    CHECK(cfg.layers[0].act == Activation::Relu);  // conv default
    CHECK(cfg.layers[0].bias);
    CHECK(cfg.layers[2].kind == HarnessLayerKind::SwsBirnn);
    CHECK(cfg.layers[2].act == Activation::Tanh);  // recurrent default
    CHECK(cfg.layers[4].kind == HarnessLayerKind::Dense);
    CHECK(cfg.layers[4].out_features == 2);  // filled from the class count
}

TEST_CASE("model config rejects malformed structure") {
    using srnn::ConfigError;
    using srnn::parse_model_config_text;
    const std::string head =
        "input.h = 8\ninput.w = 8\ninput.c = 1\nclasses = 2\n";
    CHECK_THROWS_WITH_AS(parse_model_config_text(head + "layer.0 = gap\nlayer.1 = fc\nbogus = 1\n",
                                                 "m"),
                         doctest::Contains("unknown key 'bogus'"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_model_config_text("input.h = 8\n", "m"),
                         doctest::Contains("missing key"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_model_config_text(head + "layer.0 = fc\nlayer.1 = gap\nlayer.2 = fc\n", "m"),
                         doctest::Contains("fc before gap"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_model_config_text(head + "layer.0 = gap\nlayer.1 = gap\nlayer.2 = fc\n", "m"),
        doctest::Contains("more than one gap"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_model_config_text(head + "layer.0 = gap\n", "m"),
                         doctest::Contains("fc layer after gap"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_model_config_text(head + "layer.0 = gap\nlayer.1 = fc\nlayer.1.out_features = 3\n",
                                "m"),
        doctest::Contains("!= classes"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_model_config_text(head + "layer.0 = conv\nlayer.0.out_channels = 4\n"
                                       "layer.0.k = 2\nlayer.1 = gap\nlayer.2 = fc\n",
                                "m"),
        doctest::Contains("odd"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_model_config_text(head + "layer.0 = maxpool\n", "m"),
                         doctest::Contains("unknown layer kind"), ConfigError);
}

TEST_CASE("train config text applies defaults and validates values") {
    const auto defaults = srnn::parse_train_config_text("", "t");
    CHECK(defaults.lr == 0.05);
    CHECK(defaults.momentum == 0.9);
    CHECK(defaults.batch == 32);
    CHECK(defaults.epochs == 20);
    CHECK(defaults.seed == 1);
    CHECK(defaults.precision == srnn::Precision::Single);

    const auto cfg = srnn::parse_train_config_text(
        "lr = 0.1\nmomentum = 0\nbatch = 4\nepochs = 2\nseed = 9\nprecision = double\n", "t");
    CHECK(cfg.lr == 0.1);
    CHECK(cfg.batch == 4);
    CHECK(cfg.precision == srnn::Precision::Double);

    CHECK_THROWS_WITH_AS(srnn::parse_train_config_text("turbo = on\n", "t"),
                         doctest::Contains("unknown key"), srnn::ConfigError);
    CHECK_THROWS_WITH_AS(srnn::parse_train_config_text("precision = half\n", "t"),
                         doctest::Contains("single|double"), srnn::ConfigError);
    CHECK_THROWS_WITH_AS(srnn::parse_train_config_text("lr = -1\n", "t"),
                         doctest::Contains("lr"), srnn::ConfigError);
}

TEST_CASE("built model chains shapes and produces one logit per class") {
    const auto cfg = srnn::parse_model_config_text(kBarsModelText, "bars");
    auto m = srnn::build_model<double>(cfg);
    srnn::Rng rng(5);
    srnn::init_model(m, rng);
    REQUIRE(m.layers.size() == 5);
    CHECK(m.layers[0].conv->in_channels == 1);
    CHECK(m.layers[1].conv->in_channels == 8);
    CHECK(m.layers[2].rnn->params.in_channels() == 16);  // after two stride-2 convs: 4x4x16
    CHECK(m.layers[4].dense->in_features == 16);
    CHECK(m.layers[4].dense->out_features == 2);

    const auto x = testutil::random_image<double>(16, 16, 1, 6);
    const auto f = srnn::model_forward(m, x);
    CHECK(f.logits.size() == 2);
}

TEST_CASE("conv stack and its recurrent drop-in expose the cost-model parameter counts") {
    // the substitution the cost report prices out, realized as live layers
    auto conv = srnn::make_conv2d<double>(19, 19, 3, 1, Activation::Relu, true);
    std::vector<double*> conv_ptrs;
    srnn::collect_ptrs(conv, conv_ptrs);
    CHECK(static_cast<std::int64_t>(conv_ptrs.size()) ==
          srnn::conv2d_param_count({19, 19, 3, true, 1, 1}));

    auto rnn = srnn::make_srnn_params<double>(19, 65, 65);
    std::vector<double*> rnn_ptrs;
    srnn::collect_ptrs(rnn, rnn_ptrs);
    CHECK(static_cast<std::int64_t>(rnn_ptrs.size()) ==
          srnn::srnn_param_count({19, 65, 65, false, 1, 1}));
    CHECK(rnn_ptrs.size() == 14170);
}

TEST_CASE("training with zero learning rate leaves every parameter untouched") {
    auto m = srnn::build_model<double>(tiny_config());
    srnn::Rng rng(41);
    srnn::init_model(m, rng);
    const auto before = snapshot(m);

    const auto data = srnn::make_synthetic_dataset<double>(8, 13);
    srnn::TrainConfig tc;
    tc.lr = 0.0;
    tc.epochs = 2;
    tc.batch = 4;
    const auto metrics = srnn::train(m, data, {}, tc);
    CHECK(metrics.size() == 2);
    CHECK(snapshot(m) == before);
}

TEST_CASE("training is bitwise reproducible for a fixed seed") {
    const auto data = srnn::make_synthetic_dataset<double>(16, 3);
    srnn::TrainConfig tc;
    tc.epochs = 2;
    tc.batch = 4;
    tc.lr = 0.05;

    auto run = [&]() {
        auto m = srnn::build_model<double>(tiny_config());
        srnn::Rng rng(77);
        srnn::init_model(m, rng);
        (void)srnn::train(m, data, {}, tc);
        return snapshot(m);
    };
    CHECK(run() == run());
}

TEST_CASE("trained parameters survive a save/load round trip bitwise") {
    const std::string dir = testutil::scratch_dir("params_roundtrip");
    auto m = srnn::build_model<double>(tiny_config());
    srnn::Rng rng(51);
    srnn::init_model(m, rng);
    const auto data = srnn::make_synthetic_dataset<double>(8, 5);
    srnn::TrainConfig tc;
    tc.epochs = 1;
    tc.batch = 4;
    (void)srnn::train(m, data, {}, tc);

    srnn::save_model_file(dir + "/m.params", m);
    auto back = srnn::load_model_file<double>(dir + "/m.params");
    CHECK(back.cfg.classes == 2);
    CHECK(back.cfg.in_h == 16);
    REQUIRE(back.layers.size() == m.layers.size());
    CHECK(snapshot(back) == snapshot(m));

    // the reloaded model computes identical logits
    const auto x = testutil::random_image<double>(16, 16, 1, 52);
    CHECK(srnn::model_forward(back, x).logits == srnn::model_forward(m, x).logits);
}

TEST_CASE("evaluation fills a confusion matrix whose rows sum to the class totals") {
    auto m = srnn::build_model<double>(tiny_config());
    srnn::Rng rng(61);
    srnn::init_model(m, rng);
    const auto data = srnn::make_synthetic_dataset<double>(20, 62);
    const auto r = srnn::evaluate(m, data);
    CHECK(r.classes == 2);
    std::int64_t diag = 0, total = 0;
    for (int t = 0; t < 2; ++t) {
        std::int64_t row = 0;
        for (int p = 0; p < 2; ++p) {
            row += r.at(t, p);
            total += r.at(t, p);
            if (t == p) diag += r.at(t, p);
        }
        CHECK(row == 10);  // alternating labels: 10 per class
    }
    CHECK(total == 20);
    CHECK(r.accuracy == static_cast<double>(diag) / 20.0);
}

TEST_CASE("a tiny model overfits two examples") {
    auto m = srnn::build_model<double>(tiny_config());
    srnn::Rng rng(71);
    srnn::init_model(m, rng);
    const auto two = srnn::make_synthetic_dataset<double>(2, 72);
    srnn::TrainConfig tc;
    tc.lr = 0.02;  // the 1/(1-momentum) step amplification makes 0.1 diverge here
    tc.momentum = 0.9;
    tc.batch = 2;
    tc.epochs = 150;
    const auto metrics = srnn::train(m, two, two, tc);
    CHECK(metrics.back().loss < 0.05);
    CHECK(metrics.back().accuracy == 1.0);
    CHECK(metrics.back().loss < metrics.front().loss);
}

TEST_CASE("training rejects labels outside the class range") {
    auto m = srnn::build_model<double>(tiny_config());
    srnn::Rng rng(81);
    srnn::init_model(m, rng);
    auto data = srnn::make_synthetic_dataset<double>(4, 82);
    data[2].label = 5;
    srnn::TrainConfig tc;
    tc.epochs = 1;
    CHECK_THROWS_WITH_AS(srnn::train(m, data, {}, tc), doctest::Contains("label 5"),
                         std::invalid_argument);
}

TEST_CASE("metrics files carry the epoch, loss and accuracy columns") {
    const std::string dir = testutil::scratch_dir("metrics");
    std::vector<srnn::EpochMetrics> ms;
    ms.push_back({0, 0.75, 0.5});
    ms.push_back({1, 0.25, 0.875});  // dyadic values print exactly
    srnn::write_metrics_csv(dir + "/m.csv", ms);
    const std::string text = testutil::read_file(dir + "/m.csv");
    CHECK(text.rfind("epoch,loss,accuracy\n", 0) == 0);
    CHECK(text.find("\n1,0.25,0.875") != std::string::npos);
}

TEST_SUITE_END();

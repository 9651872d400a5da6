// End-to-end checks of the srnnkit command-line tool: every subcommand is
// exercised through a real process, and file outputs are parsed back and
// compared against closed-form values.

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "srnn/pgm.hpp"
#include "test_util.hpp"

namespace {

std::string tool_path() {
    // the build injects the absolute tool location; an environment override
    // wins so the suite can also point at an installed copy
    if (const char* env = std::getenv("SRNNKIT_BIN"); env && *env && *env != '$') return env;
    return SRNNKIT_BIN_PATH;
}

// runs the tool with stdout+stderr captured into `capture_path`, returning
// the process exit code
int run_tool(const std::string& args, const std::string& capture_path) {
    const std::string cmd = tool_path() + " " + args + " > " + capture_path + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;  // killed by signal; always a failure
}

std::vector<std::vector<double>> read_csv_grid_file(const std::string& path) {
    std::ifstream is(path);
    REQUIRE_MESSAGE(is.good(), "cannot open " << path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

bool files_identical(const std::string& a, const std::string& b) {
    return testutil::read_file(a) == testutil::read_file(b);
}

// model/train configs shared by the train/eval tests: one strided conv into
// global average pooling and a 2-way classifier, small enough to train in
// milliseconds
const char* kTinyModelCfg =
    "input.h = 16\n"
    "input.w = 16\n"
    "input.c = 1\n"
    "classes = 2\n"
    "layer.0 = conv\n"
    "layer.0.out_channels = 4\n"
    "layer.0.k = 3\n"
    "layer.0.stride = 2\n"
    "layer.0.act = tanh\n"
    "layer.1 = gap\n"
    "layer.2 = fc\n";

std::string write_train_cfg(const std::string& dir, int epochs, double lr) {
    std::ostringstream os;
    os << "epochs = " << epochs << "\nlr = " << lr << "\nmomentum = 0.9\nbatch = 8\nseed = 7\n";
    const std::string path = dir + "/train.cfg";
    testutil::write_file(path, os.str());
    return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("impulse: separable bidirectional map matches the closed form") {
    const std::string dir = testutil::scratch_dir("cli_impulse");
    const std::string log = dir + "/log.txt";
    // --at is 1-based, so 5,5 is the center of a 9x9 canvas
    const int rc = run_tool("impulse --layer sws_birnn --height 9 --width 9 --at 5,5 --out " +
                                dir + "/imp",
                            log);
    CHECK(rc == 0);
    const std::string out = testutil::read_file(log);
    CHECK(out.find("imp_sws_birnn.pgm") != std::string::npos);
    CHECK(out.find("9x9") != std::string::npos);
    CHECK(out.find("max 4") != std::string::npos);

    // horizontal pass profile for the halving recurrence: 2 at the impulse,
    // halving outward; the vertical pass multiplies the same profile in
    std::vector<double> r(9);
    for (int k = 0; k < 9; ++k) r[static_cast<std::size_t>(k)] =
        (k == 4) ? 2.0 : std::ldexp(1.0, -std::abs(k - 4));

    const auto grid = read_csv_grid_file(dir + "/imp_sws_birnn.csv");
    REQUIRE(grid.size() == 9);
    for (int j = 0; j < 9; ++j) {
        REQUIRE(grid[static_cast<std::size_t>(j)].size() == 9);
        for (int k = 0; k < 9; ++k)
            CHECK(grid[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] ==
                  r[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(k)]);
    }

    const srnn::PgmImage img = srnn::read_pgm(dir + "/imp_sws_birnn.pgm");
    CHECK(img.h == 9);
    CHECK(img.w == 9);
    const auto px = [&img](int j, int k) {
        return img.pixels[static_cast<std::size_t>(j * img.w + k)];
    };
    CHECK(px(4, 4) == 255);  // the peak maps to white
    CHECK(px(0, 0) == 0);    // the corner is the minimum, mapping to black
    for (int j = 0; j < 9; ++j)
        for (int k = 0; k < j; ++k) CHECK(px(j, k) == px(k, j));

    const srnn::PgmNorm norm = srnn::read_pgm_sidecar(dir + "/imp_sws_birnn.pgm.norm.txt");
    CHECK(norm.lo == std::ldexp(1.0, -8));
    CHECK(norm.hi == 4.0);
}

TEST_CASE("impulse: default run writes all four standard layer maps") {
    const std::string dir = testutil::scratch_dir("cli_impulse_default");
    const int rc = run_tool("impulse --out " + dir + "/imp", dir + "/log.txt");
    CHECK(rc == 0);
    for (const char* layer : {"rnn_rows", "srnn", "ws_birnn", "sws_birnn"}) {
        const std::string base = dir + "/imp_" + layer;
        CHECK_MESSAGE(std::filesystem::exists(base + ".pgm"), base);
        CHECK_MESSAGE(std::filesystem::exists(base + ".pgm.norm.txt"), base);
        CHECK_MESSAGE(std::filesystem::exists(base + ".csv"), base);
        const srnn::PgmImage img = srnn::read_pgm(base + ".pgm");
        CHECK(img.h == 16);
        CHECK(img.w == 9);
    }
}

TEST_CASE("impulse: bad positions and presets are usage errors") {
    const std::string dir = testutil::scratch_dir("cli_impulse_err");
    // row 0 is outside the 1-based coordinate range
    CHECK(run_tool("impulse --layer srnn --at 0,5 --out " + dir + "/a", dir + "/l1.txt") == 2);
    CHECK(run_tool("impulse --layer srnn --at junk --out " + dir + "/b", dir + "/l2.txt") == 2);
    CHECK(run_tool("impulse --layer not_a_layer --out " + dir + "/c", dir + "/l3.txt") == 2);
    CHECK(run_tool("impulse --scalar-preset frobnicate --out " + dir + "/d", dir + "/l4.txt") ==
          2);
}

TEST_CASE("cost: text and CSV reports carry the expected totals") {
    const std::string dir = testutil::scratch_dir("cli_cost");
    const std::string model = testutil::models_dir() + "/head_compare.model";

    const int rc = run_tool("cost --model " + model, dir + "/text.txt");
    CHECK(rc == 0);
    const std::string text = testutil::read_file(dir + "/text.txt");
    CHECK(text.find("total (active rows)") != std::string::npos);
    CHECK(text.find("13072") != std::string::npos);

    CHECK(run_tool("cost --model " + model + " --csv --compare", dir + "/csv.txt") == 0);
    const std::string csv = testutil::read_file(dir + "/csv.txt");
    CHECK(csv.find("substitution_index,conv_params,rnn_params,delta_params") !=
          std::string::npos);
    // 4 stacked 3x3 convs cost 13072 parameters; the recurrent drop-in 14170
    CHECK(csv.find("5,13072,14170,1098,") != std::string::npos);

    CHECK(run_tool("cost --model " + dir + "/does_not_exist.model", dir + "/miss.txt") == 2);
    CHECK(run_tool("cost", dir + "/noarg.txt") == 2);  // --model is required
}

TEST_CASE("gradcheck: passes at the default tolerance, fails at an impossible one") {
    const std::string dir = testutil::scratch_dir("cli_gradcheck");
    const int rc = run_tool("gradcheck --layer rnn_seq --seed 3", dir + "/pass.txt");
    CHECK(rc == 0);
    const std::string out = testutil::read_file(dir + "/pass.txt");
    CHECK(out.find("gradcheck pass") != std::string::npos);
    CHECK(out.find("max_rel_err") != std::string::npos);

    CHECK(run_tool("gradcheck --layer srnn --tol 0", dir + "/fail.txt") == 1);
    CHECK(testutil::read_file(dir + "/fail.txt").find("gradcheck FAIL") != std::string::npos);

    CHECK(run_tool("gradcheck --layer bogus", dir + "/usage.txt") == 2);
}

TEST_CASE("train: identical invocations write byte-identical parameter files") {
    const std::string dir = testutil::scratch_dir("cli_train");
    const std::string model = dir + "/model.cfg";
    testutil::write_file(model, kTinyModelCfg);

    // zero epochs leaves the model at its seeded initialization
    const std::string cfg0 = write_train_cfg(dir, 0, 0.05);
    const std::string common = " --model " + model + " --data synthetic --n 32 --data-seed 5";
    CHECK(run_tool("train" + common + " --config " + cfg0 + " --out " + dir + "/p1.params",
                   dir + "/t1.txt") == 0);
    CHECK(run_tool("train" + common + " --config " + cfg0 + " --out " + dir + "/p2.params",
                   dir + "/t2.txt") == 0);
    CHECK(files_identical(dir + "/p1.params", dir + "/p2.params"));

    // a zero learning rate must not move any parameter
    const std::string cfg_lr0 = dir + "/lr0.cfg";
    testutil::write_file(cfg_lr0, "epochs = 1\nlr = 0\nmomentum = 0.9\nbatch = 8\nseed = 7\n");
    CHECK(run_tool("train" + common + " --config " + cfg_lr0 + " --out " + dir + "/p3.params",
                   dir + "/t3.txt") == 0);
    CHECK(files_identical(dir + "/p1.params", dir + "/p3.params"));
}

TEST_CASE("train: real epoch reports progress and writes metrics CSV") {
    const std::string dir = testutil::scratch_dir("cli_train_epoch");
    const std::string model = dir + "/model.cfg";
    testutil::write_file(model, kTinyModelCfg);
    const std::string cfg = write_train_cfg(dir, 2, 0.05);
    const int rc = run_tool("train --model " + model + " --config " + cfg +
                                " --data synthetic --n 40 --data-seed 5 --metrics " + dir +
                                "/metrics.csv",
                            dir + "/log.txt");
    CHECK(rc == 0);
    const std::string out = testutil::read_file(dir + "/log.txt");
    CHECK(out.find("epoch 1") != std::string::npos);
    CHECK(out.find("holdout_acc") != std::string::npos);

    std::ifstream is(dir + "/metrics.csv");
    REQUIRE(is.good());
    std::string header;
    std::getline(is, header);
    CHECK(header == "epoch,loss,accuracy");
    int data_lines = 0;
    for (std::string line; std::getline(is, line);)
        if (!line.empty()) ++data_lines;
    CHECK(data_lines == 2);
}

TEST_CASE("eval: fresh-init and trained-parameter paths both report accuracy") {
    const std::string dir = testutil::scratch_dir("cli_eval");
    const std::string model = dir + "/model.cfg";
    testutil::write_file(model, kTinyModelCfg);

    const int rc = run_tool("eval --model " + model + " --data synthetic --n 20 --data-seed 9",
                            dir + "/e1.txt");
    CHECK(rc == 0);
    const std::string out = testutil::read_file(dir + "/e1.txt");
    CHECK(out.find("examples 20  accuracy") != std::string::npos);
    CHECK(out.find("confusion (row = true, col = predicted)") != std::string::npos);

    // round-trip through a parameter file
    const std::string cfg0 = write_train_cfg(dir, 0, 0.05);
    CHECK(run_tool("train --model " + model + " --config " + cfg0 +
                       " --data synthetic --n 32 --out " + dir + "/p.params",
                   dir + "/t.txt") == 0);
    CHECK(run_tool("eval --params " + dir + "/p.params --data synthetic --n 20 --data-seed 9",
                   dir + "/e2.txt") == 0);
    CHECK(testutil::read_file(dir + "/e2.txt").find("examples 20") != std::string::npos);

    CHECK(run_tool("eval --data synthetic --n 4", dir + "/e3.txt") == 2);  // needs a model
}

TEST_CASE("usage errors and help exit with the documented codes") {
    const std::string dir = testutil::scratch_dir("cli_usage");
    const std::string model = dir + "/model.cfg";
    testutil::write_file(model, kTinyModelCfg);
    CHECK(run_tool("", dir + "/none.txt") == 2);             // a subcommand is required
    CHECK(run_tool("frobnicate", dir + "/unknown.txt") == 2);
    CHECK(run_tool("train --data synthetic", dir + "/req.txt") == 2);  // missing --model
    CHECK(run_tool("--help", dir + "/help.txt") == 0);
    CHECK(testutil::read_file(dir + "/help.txt").find("impulse") != std::string::npos);
    CHECK(run_tool("train --model nonexistent.cfg", dir + "/cfg.txt") == 2);
    CHECK(run_tool("eval --model " + model + " --data martian", dir + "/data.txt") == 2);
}

}  // TEST_SUITE

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "srnn/resource_model.hpp"

// Model description files: one layer per line, chained by `from` references
// into a DAG, with drop-in substitution groups.
//
//   # comment
//   input H W C
//   INDEX FROM conv C_in C_out K S [xN] [bias|nobias]
//   INDEX FROM rnn  C_in C_mid C_out BIDIR
//
// FROM is the producer's index, -1 for the network input. Two rows sharing
// an index are alternatives (the table's "Conv2D / SWS-BiRNN" cells); the
// first listed one is active for shape chaining, and `conv -> rnn` pairs
// feed the substitution-delta section of the report. `xN` stacks N
// identical convs (requires C_in == C_out and S == 1 for N > 1).

namespace srnn {

class ModelParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ModelRowKind { Conv, Rnn };

struct ModelRow {
    int index = 0;
    int from = -1;
    ModelRowKind kind = ModelRowKind::Conv;
    Conv2dSpec conv;      // kind == Conv; conv.h/w filled with output dims
    int repeat = 1;       // conv stack depth (the table's n column)
    int stride = 1;
    RnnLayerSpec rnn;     // kind == Rnn
    int line_no = 0;
    bool active = true;   // first alternative of its substitution group
    // resolved shapes
    std::int64_t in_h = 0, in_w = 0, in_c = 0;
    std::int64_t out_h = 0, out_w = 0, out_c = 0;
};

struct ModelDesc {
    std::int64_t in_h = 0, in_w = 0, in_c = 0;
    std::vector<ModelRow> rows;  // file order
};

struct ReportRow {
    int index;
    std::string kind;
    std::int64_t in_h, in_w, in_c;
    std::int64_t params;
    std::int64_t macs;
    bool active;
};

struct SubstitutionDelta {
    int index;
    std::int64_t conv_params, rnn_params;
    std::int64_t conv_macs, rnn_macs;
};

struct CostReport {
    std::vector<ReportRow> rows;
    std::int64_t total_params = 0;  // active rows only
    std::int64_t total_macs = 0;
    std::int64_t arena_bytes = 0;   // sequential-execution estimate, f32
    std::vector<SubstitutionDelta> substitutions;
};

// Throws ModelParseError with the offending line number / row index.
ModelDesc parse_model_text(const std::string& text, const std::string& origin);
ModelDesc parse_model_file(const std::string& path);

CostReport build_cost_report(const ModelDesc& desc);

std::string format_report_text(const CostReport& report, bool with_substitutions);
std::string format_report_csv(const CostReport& report);

}  // namespace srnn

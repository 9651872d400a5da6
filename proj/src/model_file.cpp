#include "srnn/model_file.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace srnn {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

bool parse_int(const std::string& tok, long long& out) {
    try {
        std::size_t pos = 0;
        out = std::stoll(tok, &pos);
        return pos == tok.size();
    } catch (...) {
        return false;
    }
}

[[noreturn]] void fail_line(const std::string& origin, int line_no, const std::string& msg) {
    throw ModelParseError(origin + ":" + std::to_string(line_no) + ": " + msg);
}

std::string row_name(const ModelRow& r) {
    return "row " + std::to_string(r.index) + " (line " + std::to_string(r.line_no) + ")";
}

}  // namespace

ModelDesc parse_model_text(const std::string& text, const std::string& origin) {
    ModelDesc desc;
    bool have_input = false;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;

        if (tok[0] == "input") {
            if (have_input) fail_line(origin, line_no, "duplicate input line");
            long long h, w, c;
            if (tok.size() != 4 || !parse_int(tok[1], h) || !parse_int(tok[2], w) ||
                !parse_int(tok[3], c) || h < 1 || w < 1 || c < 1)
                fail_line(origin, line_no, "malformed input line, expected 'input H W C'");
            desc.in_h = h;
            desc.in_w = w;
            desc.in_c = c;
            have_input = true;
            continue;
        }

        if (!have_input) fail_line(origin, line_no, "layer line before 'input H W C' header");
        long long index, from;
        if (tok.size() < 3 || !parse_int(tok[0], index) || !parse_int(tok[1], from) || index < 0)
            fail_line(origin, line_no, "malformed layer line, expected 'INDEX FROM kind ...'");
        ModelRow row;
        row.index = static_cast<int>(index);
        row.from = static_cast<int>(from);
        row.line_no = line_no;

        const std::string& kind = tok[2];
        if (kind == "conv") {
            long long ci, co, k, s;
            if (tok.size() < 7 || !parse_int(tok[3], ci) || !parse_int(tok[4], co) ||
                !parse_int(tok[5], k) || !parse_int(tok[6], s) || ci < 1 || co < 1 || k < 1 ||
                s < 1)
                fail_line(origin, line_no, "malformed conv row, expected 'conv C_in C_out K S'");
            row.kind = ModelRowKind::Conv;
            row.conv.c_in = ci;
            row.conv.c_out = co;
            row.conv.k = k;
            row.stride = static_cast<int>(s);
            row.conv.has_bias = true;
            for (std::size_t i = 7; i < tok.size(); ++i) {
                const std::string& t = tok[i];
                long long n;
                if (t == "bias") {
                    row.conv.has_bias = true;
                } else if (t == "nobias") {
                    row.conv.has_bias = false;
                } else if (t.size() > 1 && t[0] == 'x' && parse_int(t.substr(1), n) && n >= 1) {
                    row.repeat = static_cast<int>(n);
                } else {
                    fail_line(origin, line_no, "unknown conv option '" + t + "'");
                }
            }
            if (row.repeat > 1 && (row.conv.c_in != row.conv.c_out || row.stride != 1))
                fail_line(origin, line_no,
                          "conv stack xN needs C_in == C_out and stride 1");
        } else if (kind == "rnn") {
            long long ci, cm, co, bd;
            if (tok.size() != 7 || !parse_int(tok[3], ci) || !parse_int(tok[4], cm) ||
                !parse_int(tok[5], co) || !parse_int(tok[6], bd) || ci < 1 || cm < 1 || co < 1 ||
                (bd != 0 && bd != 1))
                fail_line(origin, line_no,
                          "malformed rnn row, expected 'rnn C_in C_mid C_out BIDIR'");
            row.kind = ModelRowKind::Rnn;
            row.rnn.c_in = ci;
            row.rnn.c_mid = cm;
            row.rnn.c_out = co;
            row.rnn.bidirectional = bd == 1;
        } else {
            fail_line(origin, line_no, "unknown layer kind '" + kind + "'");
        }
        desc.rows.push_back(row);
    }
    if (!have_input) throw ModelParseError(origin + ": missing 'input H W C' header");

    // first row of each index is the active alternative
    std::map<int, std::size_t> first_of_index;
    for (std::size_t i = 0; i < desc.rows.size(); ++i) {
        ModelRow& r = desc.rows[i];
        auto [it, inserted] = first_of_index.try_emplace(r.index, i);
        r.active = inserted;
    }

    // resolve shapes in file order; producers must be earlier active rows
    std::map<int, std::size_t> produced;  // index -> row position, active rows only
    for (std::size_t i = 0; i < desc.rows.size(); ++i) {
        ModelRow& r = desc.rows[i];
        std::int64_t ih, iw, ic;
        if (r.from == -1) {
            ih = desc.in_h;
            iw = desc.in_w;
            ic = desc.in_c;
        } else {
            const auto it = produced.find(r.from);
            if (it == produced.end())
                throw ModelParseError(row_name(r) + ": dangling `from` reference " +
                                      std::to_string(r.from));
            const ModelRow& p = desc.rows[it->second];
            ih = p.out_h;
            iw = p.out_w;
            ic = p.out_c;
        }
        r.in_h = ih;
        r.in_w = iw;
        r.in_c = ic;
        const std::int64_t declared_cin =
            r.kind == ModelRowKind::Conv ? r.conv.c_in : r.rnn.c_in;
        if (declared_cin != ic)
            throw ModelParseError(row_name(r) + ": declared input channels " +
                                  std::to_string(declared_cin) + " but producer output has " +
                                  std::to_string(ic));
        if (r.kind == ModelRowKind::Conv) {
            r.out_h = ceil_div(ih, r.stride);
            r.out_w = ceil_div(iw, r.stride);
            r.out_c = r.conv.c_out;
            r.conv.h = r.out_h;  // MAC formula runs per output position
            r.conv.w = r.out_w;
        } else {
            r.out_h = ih;
            r.out_w = iw;
            r.out_c = r.rnn.c_out;
            r.rnn.h = ih;
            r.rnn.w = iw;
        }
        if (r.active) produced[r.index] = i;
    }
    return desc;
}

ModelDesc parse_model_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ModelParseError("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_model_text(buf.str(), path);
}

namespace {

LayerCost row_cost(const ModelRow& r) {
    LayerCost c;
    if (r.kind == ModelRowKind::Conv) {
        c.parameters = r.repeat * conv2d_param_count(r.conv);
        c.macs = r.repeat * conv2d_mac_count(r.conv);
    } else {
        c.parameters = srnn_param_count(r.rnn);
        c.macs = srnn_mac_count(r.rnn);
    }
    return c;
}

std::string kind_name(const ModelRow& r) {
    if (r.kind == ModelRowKind::Conv) return "conv2d";
    return r.rnn.bidirectional ? "sws-birnn" : "srnn";
}

}  // namespace

CostReport build_cost_report(const ModelDesc& desc) {
    CostReport rep;
    for (const ModelRow& r : desc.rows) {
        const LayerCost c = row_cost(r);
        rep.rows.push_back(ReportRow{r.index, kind_name(r), r.in_h, r.in_w, r.in_c, c.parameters,
                                     c.macs, r.active});
        if (r.active) {
            rep.total_params += c.parameters;
            rep.total_macs += c.macs;
        }
    }

    // substitution groups: first conv and first rnn alternative per index
    std::map<int, std::pair<const ModelRow*, const ModelRow*>> groups;  // conv, rnn
    for (const ModelRow& r : desc.rows) {
        auto& g = groups[r.index];
        if (r.kind == ModelRowKind::Conv && g.first == nullptr) g.first = &r;
        if (r.kind == ModelRowKind::Rnn && g.second == nullptr) g.second = &r;
    }
    for (const auto& [index, g] : groups) {
        if (g.first && g.second) {
            const LayerCost cc = row_cost(*g.first);
            const LayerCost rc = row_cost(*g.second);
            rep.substitutions.push_back(
                SubstitutionDelta{index, cc.parameters, rc.parameters, cc.macs, rc.macs});
        }
    }

    // tensor arena: max live activation bytes under sequential execution of
    // the active rows, f32 elements; an estimate, not a scheduler model
    std::vector<const ModelRow*> steps;
    for (const ModelRow& r : desc.rows)
        if (r.active) steps.push_back(&r);
    const auto bytes_of = [](std::int64_t h, std::int64_t w, std::int64_t c) {
        return h * w * c * 4;
    };
    const std::int64_t input_bytes = bytes_of(desc.in_h, desc.in_w, desc.in_c);
    // last step consuming each tensor; key -1 is the network input
    std::map<int, std::size_t> last_use;
    for (std::size_t s = 0; s < steps.size(); ++s) last_use[steps[s]->from] = s;
    std::map<int, std::size_t> produced_at;
    rep.arena_bytes = input_bytes;
    for (std::size_t s = 0; s < steps.size(); ++s) {
        std::int64_t live = 0;
        const auto input_last = last_use.find(-1);
        if (input_last != last_use.end() && input_last->second >= s) live += input_bytes;
        for (std::size_t p = 0; p < s; ++p) {
            const auto lu = last_use.find(steps[p]->index);
            if (lu != last_use.end() && lu->second >= s)
                live += bytes_of(steps[p]->out_h, steps[p]->out_w, steps[p]->out_c);
        }
        live += bytes_of(steps[s]->out_h, steps[s]->out_w, steps[s]->out_c);
        rep.arena_bytes = std::max(rep.arena_bytes, live);
    }
    return rep;
}

std::string format_report_text(const CostReport& rep, bool with_substitutions) {
    std::ostringstream os;
    os << std::left << std::setw(7) << "index" << std::setw(11) << "kind" << std::setw(13)
       << "input" << std::right << std::setw(12) << "params" << std::setw(16) << "macs" << "\n";
    for (const ReportRow& r : rep.rows) {
        const std::string shape = std::to_string(r.in_h) + "x" + std::to_string(r.in_w) + "x" +
                                  std::to_string(r.in_c);
        std::string idx = std::to_string(r.index);
        if (!r.active) idx += "*";  // inactive alternative
        os << std::left << std::setw(7) << idx << std::setw(11) << r.kind << std::setw(13)
           << shape << std::right << std::setw(12) << r.params << std::setw(16) << r.macs
           << "\n";
    }
    os << std::left << std::setw(31) << "total (active rows)" << std::right << std::setw(12)
       << rep.total_params << std::setw(16) << rep.total_macs << "\n";
    os << "tensor arena estimate (sequential, f32): " << rep.arena_bytes
       << " bytes -- estimate only, scheduler-dependent\n";
    os << "MAC convention: scalar multiplies plus one per bias element; activations and "
          "bidirectional merge additions are not counted\n";
    if (with_substitutions) {
        os << "\nconv -> rnn substitutions\n";
        os << std::left << std::setw(7) << "index" << std::right << std::setw(12) << "conv_params"
           << std::setw(12) << "rnn_params" << std::setw(9) << "delta" << std::setw(14)
           << "conv_macs" << std::setw(14) << "rnn_macs" << "\n";
        for (const SubstitutionDelta& d : rep.substitutions) {
            const std::int64_t delta = d.rnn_params - d.conv_params;
            os << std::left << std::setw(7) << d.index << std::right << std::setw(12)
               << d.conv_params << std::setw(12) << d.rnn_params << std::setw(9)
               << (delta >= 0 ? "+" + std::to_string(delta) : std::to_string(delta))
               << std::setw(14) << d.conv_macs << std::setw(14) << d.rnn_macs << "\n";
        }
    }
    return os.str();
}

std::string format_report_csv(const CostReport& rep) {
    std::ostringstream os;
    os << "index,kind,input_h,input_w,input_c,params,macs,active\n";
    for (const ReportRow& r : rep.rows) {
        os << r.index << ',' << r.kind << ',' << r.in_h << ',' << r.in_w << ',' << r.in_c << ','
           << r.params << ',' << r.macs << ',' << (r.active ? 1 : 0) << "\n";
    }
    os << "total,,,,," << rep.total_params << ',' << rep.total_macs << ",\n";
    os << "arena_bytes_estimate,,,,," << rep.arena_bytes << ",,\n";
    return os.str();
}

}  // namespace srnn

#pragma once

#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "srnn/model.hpp"
#include "srnn/rnn2d.hpp"

// Text serialization of layer parameters. Block headers:
//
//   RNNCELL C_in C_out activation    W_ih (row-major), W_hh, b_ih, b_hh
//   SRNN                             two RNNCELL blocks (rows, then columns)
//   RNN2D C_in C_out activation      w_ih, w_hk, w_hj, w_jk, b
//   DSRNN C_in C_out activation D    w_ih, w_a, w_b, w_c, b, pointwise
//   MODEL in_h in_w in_c classes N   N layer blocks (below)
//   CONV2D C_in C_out K S act B      w (row-major), b
//   SRNNLAYER B                      one SRNN block
//   GAP
//   FC in out                        w (row-major), b
//
// All numbers are whitespace-separated; floats are printed with enough
// digits to round-trip bitwise.

namespace srnn {

class ParamsIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

template <std::floating_point T>
void set_float_precision(std::ostream& os) {
    os.precision(std::numeric_limits<T>::max_digits10);
}

inline std::string next_word(std::istream& is, const char* what) {
    std::string w;
    if (!(is >> w)) throw ParamsIoError(std::string("unexpected end of file, wanted ") + what);
    return w;
}

inline void expect_word(std::istream& is, const std::string& want) {
    const std::string got = next_word(is, want.c_str());
    if (got != want)
        throw ParamsIoError("expected '" + want + "', got '" + got + "'");
}

inline int read_int(std::istream& is, const char* what) {
    int v;
    if (!(is >> v)) throw ParamsIoError(std::string("malformed integer for ") + what);
    return v;
}

template <std::floating_point T>
void read_floats(std::istream& is, std::vector<T>& out, const char* what) {
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!(is >> out[i]))
            throw ParamsIoError(std::string("truncated float block for ") + what);
}

template <std::floating_point T>
void write_matrix(std::ostream& os, const Matrix<T>& m) {
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            if (c) os << ' ';
            os << m(r, c);
        }
        os << '\n';
    }
}

template <std::floating_point T>
void write_vector(std::ostream& os, const std::vector<T>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ' ';
        os << v[i];
    }
    os << '\n';
}

}  // namespace detail

// ---- RNNCELL / SRNN --------------------------------------------------------

template <std::floating_point T>
void save_rnn_cell(std::ostream& os, const RnnCell<T>& cell) {
    detail::set_float_precision<T>(os);
    os << "RNNCELL " << cell.in_channels << ' ' << cell.out_channels << ' '
       << activation_name(cell.act) << '\n';
    detail::write_matrix(os, cell.w_ih);
    detail::write_matrix(os, cell.w_hh);
    detail::write_vector(os, cell.b_ih);
    detail::write_vector(os, cell.b_hh);
}

template <std::floating_point T>
RnnCell<T> load_rnn_cell(std::istream& is) {
    detail::expect_word(is, "RNNCELL");
    const int ci = detail::read_int(is, "RNNCELL C_in");
    const int co = detail::read_int(is, "RNNCELL C_out");
    if (ci < 1 || co < 1) throw ParamsIoError("RNNCELL: channel counts must be >= 1");
    const Activation act = parse_activation(detail::next_word(is, "activation"));
    RnnCell<T> cell = make_rnn_cell<T>(ci, co, act);
    detail::read_floats(is, cell.w_ih.data, "RNNCELL W_ih");
    detail::read_floats(is, cell.w_hh.data, "RNNCELL W_hh");
    detail::read_floats(is, cell.b_ih, "RNNCELL b_ih");
    detail::read_floats(is, cell.b_hh, "RNNCELL b_hh");
    return cell;
}

template <std::floating_point T>
void save_srnn(std::ostream& os, const SrnnParams<T>& p) {
    os << "SRNN\n";
    save_rnn_cell(os, p.row_cell);
    save_rnn_cell(os, p.col_cell);
}

template <std::floating_point T>
SrnnParams<T> load_srnn(std::istream& is) {
    detail::expect_word(is, "SRNN");
    SrnnParams<T> p;
    p.row_cell = load_rnn_cell<T>(is);
    p.col_cell = load_rnn_cell<T>(is);
    validate_srnn_params(p, "load_srnn");
    return p;
}

// ---- RNN2D / DSRNN ---------------------------------------------------------

template <std::floating_point T>
void save_rnn2d(std::ostream& os, const Rnn2dCell<T>& cell) {
    detail::set_float_precision<T>(os);
    os << "RNN2D " << cell.in_channels << ' ' << cell.out_channels << ' '
       << activation_name(cell.act) << '\n';
    detail::write_matrix(os, cell.w_ih);
    detail::write_matrix(os, cell.w_hk);
    detail::write_matrix(os, cell.w_hj);
    detail::write_matrix(os, cell.w_jk);
    detail::write_vector(os, cell.b);
}

template <std::floating_point T>
Rnn2dCell<T> load_rnn2d(std::istream& is) {
    detail::expect_word(is, "RNN2D");
    const int ci = detail::read_int(is, "RNN2D C_in");
    const int co = detail::read_int(is, "RNN2D C_out");
    if (ci < 1 || co < 1) throw ParamsIoError("RNN2D: channel counts must be >= 1");
    const Activation act = parse_activation(detail::next_word(is, "activation"));
    Rnn2dCell<T> cell = make_rnn2d_cell<T>(ci, co, act);
    detail::read_floats(is, cell.w_ih.data, "RNN2D w_ih");
    detail::read_floats(is, cell.w_hk.data, "RNN2D w_hk");
    detail::read_floats(is, cell.w_hj.data, "RNN2D w_hj");
    detail::read_floats(is, cell.w_jk.data, "RNN2D w_jk");
    detail::read_floats(is, cell.b, "RNN2D b");
    return cell;
}

template <std::floating_point T>
void save_ds_rnn(std::ostream& os, const DsRnnParams<T>& p) {
    detail::set_float_precision<T>(os);
    os << "DSRNN " << p.in_channels << ' ' << p.out_channels << ' ' << activation_name(p.act)
       << ' ' << (p.has_diag ? 1 : 0) << '\n';
    detail::write_vector(os, p.w_ih);
    detail::write_vector(os, p.w_a);
    detail::write_vector(os, p.w_b);
    detail::write_vector(os, p.w_c);
    detail::write_vector(os, p.b);
    detail::write_matrix(os, p.pointwise);
}

template <std::floating_point T>
DsRnnParams<T> load_ds_rnn(std::istream& is) {
    detail::expect_word(is, "DSRNN");
    const int ci = detail::read_int(is, "DSRNN C_in");
    const int co = detail::read_int(is, "DSRNN C_out");
    if (ci < 1 || co < 1) throw ParamsIoError("DSRNN: channel counts must be >= 1");
    const Activation act = parse_activation(detail::next_word(is, "activation"));
    const int diag = detail::read_int(is, "DSRNN diag flag");
    if (diag != 0 && diag != 1) throw ParamsIoError("DSRNN: diag flag must be 0 or 1");
    DsRnnParams<T> p = make_ds_rnn_params<T>(ci, co, act, diag == 1);
    detail::read_floats(is, p.w_ih, "DSRNN w_ih");
    detail::read_floats(is, p.w_a, "DSRNN w_a");
    detail::read_floats(is, p.w_b, "DSRNN w_b");
    detail::read_floats(is, p.w_c, "DSRNN w_c");
    detail::read_floats(is, p.b, "DSRNN b");
    detail::read_floats(is, p.pointwise.data, "DSRNN pointwise");
    return p;
}

// ---- harness model ---------------------------------------------------------

template <std::floating_point T>
void save_model(std::ostream& os, const Model<T>& m) {
    detail::set_float_precision<T>(os);
    os << "MODEL " << m.cfg.in_h << ' ' << m.cfg.in_w << ' ' << m.cfg.in_c << ' '
       << m.cfg.classes << ' ' << m.layers.size() << '\n';
    for (const ModelLayer<T>& layer : m.layers) {
        switch (layer.kind) {
            case HarnessLayerKind::Conv: {
                const Conv2dParams<T>& p = *layer.conv;
                os << "CONV2D " << p.in_channels << ' ' << p.out_channels << ' ' << p.k << ' '
                   << p.stride << ' ' << activation_name(p.act) << ' ' << (p.has_bias ? 1 : 0)
                   << '\n';
                detail::write_matrix(os, p.w);
                detail::write_vector(os, p.b);
                break;
            }
            case HarnessLayerKind::SwsBirnn:
            case HarnessLayerKind::Srnn:
                os << "SRNNLAYER " << (layer.rnn->bidirectional ? 1 : 0) << '\n';
                save_srnn(os, layer.rnn->params);
                break;
            case HarnessLayerKind::Gap:
                os << "GAP\n";
                break;
            case HarnessLayerKind::Dense: {
                const DenseParams<T>& p = *layer.dense;
                os << "FC " << p.in_features << ' ' << p.out_features << '\n';
                detail::write_matrix(os, p.w);
                detail::write_vector(os, p.b);
                break;
            }
        }
    }
}

template <std::floating_point T>
void save_model_file(const std::string& path, const Model<T>& m) {
    std::ofstream os(path);
    if (!os) throw ParamsIoError("cannot open '" + path + "' for writing");
    save_model(os, m);
    if (!os) throw ParamsIoError("write failure on '" + path + "'");
}

// The file is self-describing: the returned model carries a reconstructed
// configuration, so evaluation does not need the original config file.
template <std::floating_point T>
Model<T> load_model(std::istream& is) {
    detail::expect_word(is, "MODEL");
    Model<T> m;
    m.cfg.in_h = detail::read_int(is, "MODEL in_h");
    m.cfg.in_w = detail::read_int(is, "MODEL in_w");
    m.cfg.in_c = detail::read_int(is, "MODEL in_c");
    m.cfg.classes = detail::read_int(is, "MODEL classes");
    const int n = detail::read_int(is, "MODEL layer count");
    if (n < 1) throw ParamsIoError("MODEL: layer count must be >= 1");
    for (int i = 0; i < n; ++i) {
        const std::string head = detail::next_word(is, "layer block header");
        ModelLayer<T> layer;
        LayerConfig lc;
        if (head == "CONV2D") {
            const int ci = detail::read_int(is, "CONV2D C_in");
            const int co = detail::read_int(is, "CONV2D C_out");
            const int k = detail::read_int(is, "CONV2D K");
            const int s = detail::read_int(is, "CONV2D S");
            const Activation act = parse_activation(detail::next_word(is, "activation"));
            const int bias = detail::read_int(is, "CONV2D bias flag");
            if (bias != 0 && bias != 1) throw ParamsIoError("CONV2D: bias flag must be 0 or 1");
            Conv2dParams<T> p = make_conv2d<T>(ci, co, k, s, act, bias == 1);
            detail::read_floats(is, p.w.data, "CONV2D w");
            detail::read_floats(is, p.b, "CONV2D b");
            layer.kind = HarnessLayerKind::Conv;
            layer.conv = std::move(p);
            lc.kind = HarnessLayerKind::Conv;
            lc.out_channels = co;
            lc.k = k;
            lc.stride = s;
            lc.bias = bias == 1;
            lc.act = act;
        } else if (head == "SRNNLAYER") {
            const int bidir = detail::read_int(is, "SRNNLAYER direction flag");
            if (bidir != 0 && bidir != 1)
                throw ParamsIoError("SRNNLAYER: direction flag must be 0 or 1");
            RecurrentLayer<T> r{load_srnn<T>(is), bidir == 1};
            lc.kind = bidir == 1 ? HarnessLayerKind::SwsBirnn : HarnessLayerKind::Srnn;
            lc.mid_channels = r.params.mid_channels();
            lc.out_channels = r.params.out_channels();
            lc.act = r.params.row_cell.act;
            layer.kind = lc.kind;
            layer.rnn = std::move(r);
        } else if (head == "GAP") {
            layer.kind = HarnessLayerKind::Gap;
            lc.kind = HarnessLayerKind::Gap;
        } else if (head == "FC") {
            const int fin = detail::read_int(is, "FC in");
            const int fout = detail::read_int(is, "FC out");
            DenseParams<T> p = make_dense<T>(fin, fout);
            detail::read_floats(is, p.w.data, "FC w");
            detail::read_floats(is, p.b, "FC b");
            layer.kind = HarnessLayerKind::Dense;
            layer.dense = std::move(p);
            lc.kind = HarnessLayerKind::Dense;
            lc.out_features = fout;
        } else {
            throw ParamsIoError("unknown layer block '" + head + "'");
        }
        m.cfg.layers.push_back(lc);
        m.layers.push_back(std::move(layer));
    }
    return m;
}

template <std::floating_point T>
Model<T> load_model_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParamsIoError("cannot open '" + path + "'");
    return load_model<T>(is);
}

}  // namespace srnn

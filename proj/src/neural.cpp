#include "lizard/neural.hpp"

#include <cmath>
#include <fstream>
#include <vector>

#include "lizard/error.hpp"
#include "lizard/textio.hpp"

namespace lizard {

int NetSpec::param_count() const {
  const int conv = filters * kernel + filters;
  const int gru_dir = 3 * (hidden * filters + hidden * hidden + hidden);
  const int head = 2 * hidden + 1;
  return conv + 2 * gru_dir + head;
}

void NetSpec::validate() const {
  if (input_dim < 1 || filters < 1 || kernel < 1 || hidden < 1)
    throw ArgumentError("net spec: all sizes must be >= 1");
  if (padding == Padding::kValid && kernel > input_dim)
    throw ArgumentError("net spec: kernel wider than input with valid padding");
}

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

class FlatReader {
 public:
  explicit FlatReader(Eigen::Ref<const Vec> flat) : flat_(flat) {}

  Mat matrix(Index rows, Index cols) {
    Mat m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = next();
    return m;
  }
  Vec vector(Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = next();
    return v;
  }
  double next() { return flat_[pos_++]; }

 private:
  Eigen::Ref<const Vec> flat_;
  Index pos_ = 0;
};

class FlatWriter {
 public:
  explicit FlatWriter(Index n) : flat_(n) {}

  void matrix(const Mat& m) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) flat_[pos_++] = m(i, j);
  }
  void vector(const Vec& v) {
    for (Index i = 0; i < v.size(); ++i) flat_[pos_++] = v[i];
  }
  void value(double v) { flat_[pos_++] = v; }
  Vec take() { return std::move(flat_); }

 private:
  Vec flat_;
  Index pos_ = 0;
};

GruParams read_gru(FlatReader& reader, int hidden, int filters) {
  GruParams g;
  g.w_update = reader.matrix(hidden, filters);
  g.u_update = reader.matrix(hidden, hidden);
  g.b_update = reader.vector(hidden);
  g.w_reset = reader.matrix(hidden, filters);
  g.u_reset = reader.matrix(hidden, hidden);
  g.b_reset = reader.vector(hidden);
  g.w_cand = reader.matrix(hidden, filters);
  g.u_cand = reader.matrix(hidden, hidden);
  g.b_cand = reader.vector(hidden);
  return g;
}

void write_gru(FlatWriter& writer, const GruParams& g) {
  writer.matrix(g.w_update);
  writer.matrix(g.u_update);
  writer.vector(g.b_update);
  writer.matrix(g.w_reset);
  writer.matrix(g.u_reset);
  writer.vector(g.b_reset);
  writer.matrix(g.w_cand);
  writer.matrix(g.u_cand);
  writer.vector(g.b_cand);
}

}  // namespace

Vec flatten(const NetSpec& spec, const NetParams& params) {
  spec.validate();
  FlatWriter writer(spec.param_count());
  writer.matrix(params.conv_w);
  writer.vector(params.conv_b);
  write_gru(writer, params.fwd);
  write_gru(writer, params.bwd);
  writer.vector(params.head_w);
  writer.value(params.head_b);
  return writer.take();
}

NetParams unflatten(const NetSpec& spec, Eigen::Ref<const Vec> flat) {
  spec.validate();
  if (flat.size() != spec.param_count())
    throw ArgumentError("unflatten: expected " +
                        std::to_string(spec.param_count()) + " values, got " +
                        std::to_string(flat.size()));
  FlatReader reader(flat);
  NetParams p;
  p.conv_w = reader.matrix(spec.filters, spec.kernel);
  p.conv_b = reader.vector(spec.filters);
  p.fwd = read_gru(reader, spec.hidden, spec.filters);
  p.bwd = read_gru(reader, spec.hidden, spec.filters);
  p.head_w = reader.vector(2 * spec.hidden);
  p.head_b = reader.next();
  return p;
}

Mat conv1d_response(const NetSpec& spec, const Mat& conv_w, const Vec& conv_b,
                    Eigen::Ref<const Vec> seq) {
  spec.validate();
  if (seq.size() != spec.input_dim)
    throw ArgumentError("conv1d: sequence length mismatch");
  const int T = spec.seq_len();
  const int offset = spec.padding == Padding::kSame ? (spec.kernel - 1) / 2 : 0;
  Mat out(T, spec.filters);
  for (int t = 0; t < T; ++t)
    for (int f = 0; f < spec.filters; ++f) {
      double acc = conv_b[f];
      for (int j = 0; j < spec.kernel; ++j) {
        const int src = t + j - offset;
        if (src < 0 || src >= spec.input_dim) continue;  // zero padding
        acc += conv_w(f, j) * seq[src];
      }
      out(t, f) = acc;
    }
  return out;
}

Mat conv1d_forward(const NetSpec& spec, const Mat& conv_w, const Vec& conv_b,
                   Eigen::Ref<const Vec> seq) {
  return conv1d_response(spec, conv_w, conv_b, seq).array().tanh().matrix();
}

Vec gru_cell_step(const GruParams& gate, Eigen::Ref<const Vec> x_t,
                  Eigen::Ref<const Vec> h_prev) {
  if (x_t.size() != gate.w_update.cols() ||
      h_prev.size() != gate.u_update.cols())
    throw ArgumentError("gru step: dimension mismatch");
  const Vec z = (gate.w_update * x_t + gate.u_update * h_prev + gate.b_update)
                    .unaryExpr([](double v) { return sigmoid(v); });
  const Vec r = (gate.w_reset * x_t + gate.u_reset * h_prev + gate.b_reset)
                    .unaryExpr([](double v) { return sigmoid(v); });
  const Vec n = (gate.w_cand * x_t +
                 gate.u_cand * (r.array() * h_prev.array()).matrix() +
                 gate.b_cand)
                    .array()
                    .tanh()
                    .matrix();
  return ((1.0 - z.array()) * h_prev.array() + z.array() * n.array())
      .matrix();
}

Vec bigru_forward(const NetSpec& spec, const GruParams& fwd,
                  const GruParams& bwd, const Mat& seq) {
  if (seq.rows() < 1) throw ArgumentError("bigru: empty sequence");
  if (seq.cols() != spec.filters)
    throw ArgumentError("bigru: channel count mismatch");
  const Index T = seq.rows();
  Vec h_fwd = Vec::Zero(spec.hidden);
  for (Index t = 0; t < T; ++t)
    h_fwd = gru_cell_step(fwd, seq.row(t).transpose(), h_fwd);
  Vec h_bwd = Vec::Zero(spec.hidden);
  for (Index t = T - 1; t >= 0; --t)
    h_bwd = gru_cell_step(bwd, seq.row(t).transpose(), h_bwd);
  Vec out(2 * spec.hidden);
  out << h_fwd, h_bwd;
  return out;
}

double predict(const NetSpec& spec, const NetParams& params,
               Eigen::Ref<const Vec> x) {
  const Mat seq = conv1d_forward(spec, params.conv_w, params.conv_b, x);
  const Vec g = bigru_forward(spec, params.fwd, params.bwd, seq);
  return sigmoid(params.head_w.dot(g) + params.head_b);
}

double predict(const NetSpec& spec, Eigen::Ref<const Vec> flat_params,
               Eigen::Ref<const Vec> x) {
  return predict(spec, unflatten(spec, flat_params), x);
}

namespace {

// Batched GRU sweep: rows of the state matrix are per-sample hidden states.
Mat gru_sweep(const GruParams& gate, const std::vector<Mat>& seq,
              bool reverse) {
  const Index n = seq.front().rows();
  const Index hidden = gate.u_update.cols();
  Mat h = Mat::Zero(n, hidden);
  const Index T = static_cast<Index>(seq.size());
  for (Index step = 0; step < T; ++step) {
    const Mat& x = seq[static_cast<std::size_t>(reverse ? T - 1 - step : step)];
    const Mat z =
        ((x * gate.w_update.transpose() + h * gate.u_update.transpose())
             .rowwise() +
         gate.b_update.transpose())
            .unaryExpr([](double v) { return sigmoid(v); });
    const Mat r =
        ((x * gate.w_reset.transpose() + h * gate.u_reset.transpose())
             .rowwise() +
         gate.b_reset.transpose())
            .unaryExpr([](double v) { return sigmoid(v); });
    const Mat rh = (r.array() * h.array()).matrix();
    const Mat n_gate =
        ((x * gate.w_cand.transpose() + rh * gate.u_cand.transpose())
             .rowwise() +
         gate.b_cand.transpose())
            .array()
            .tanh()
            .matrix();
    h = ((1.0 - z.array()) * h.array() + z.array() * n_gate.array()).matrix();
  }
  return h;
}

}  // namespace

Vec predict_batch(const NetSpec& spec, const NetParams& params, const Mat& X) {
  spec.validate();
  if (X.cols() != spec.input_dim)
    throw ArgumentError("predict: feature count mismatch");
  const Index n = X.rows();
  const int T = spec.seq_len();
  const int offset = spec.padding == Padding::kSame ? (spec.kernel - 1) / 2 : 0;

  std::vector<Mat> seq(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    Mat resp = Mat::Zero(n, spec.filters);
    resp.rowwise() += params.conv_b.transpose();
    for (int j = 0; j < spec.kernel; ++j) {
      const int src = t + j - offset;
      if (src < 0 || src >= spec.input_dim) continue;
      resp += X.col(src) * params.conv_w.col(j).transpose();
    }
    seq[static_cast<std::size_t>(t)] = resp.array().tanh().matrix();
  }

  const Mat h_fwd = gru_sweep(params.fwd, seq, false);
  const Mat h_bwd = gru_sweep(params.bwd, seq, true);

  const Index hidden = spec.hidden;
  Vec logits = h_fwd * params.head_w.head(hidden) +
               h_bwd * params.head_w.tail(hidden);
  logits.array() += params.head_b;
  return logits.unaryExpr([](double v) { return sigmoid(v); });
}

double fitness(const NetSpec& spec, const NetParams& params,
               const Dataset& scaled_train) {
  if (scaled_train.rows() < 1) throw ArgumentError("fitness: empty dataset");
  const Vec predicted = predict_batch(spec, params, scaled_train.features());
  return (scaled_train.target() - predicted).squaredNorm() /
         static_cast<double>(scaled_train.rows());
}

double fitness(const NetSpec& spec, Eigen::Ref<const Vec> flat_params,
               const Dataset& scaled_train) {
  return fitness(spec, unflatten(spec, flat_params), scaled_train);
}

namespace {

constexpr const char* kNeuralTag = "lizard-hloa-cnn-bigru v1";

}  // namespace

void save_neural(const NeuralModel& model, const std::string& path) {
  model.spec.validate();
  if (model.params.size() != model.spec.param_count())
    throw ArgumentError("neural model: parameter count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open file for writing: " + path);
  out << kNeuralTag << '\n';
  out << "input_dim " << model.spec.input_dim << '\n';
  out << "filters " << model.spec.filters << '\n';
  out << "kernel " << model.spec.kernel << '\n';
  out << "hidden " << model.spec.hidden << '\n';
  out << "padding "
      << (model.spec.padding == Padding::kSame ? "same" : "valid") << '\n';
  out << "scaler " << model.scaler.feature_names().size() << '\n';
  for (std::size_t j = 0; j < model.scaler.feature_names().size(); ++j)
    out << model.scaler.feature_names()[j] << ' '
        << format_full(model.scaler.feature_min()[static_cast<Index>(j)])
        << ' '
        << format_full(model.scaler.feature_max()[static_cast<Index>(j)])
        << '\n';
  out << "params " << model.params.size() << '\n';
  for (Index i = 0; i < model.params.size(); ++i)
    out << format_full(model.params[i]) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

NeuralModel load_neural(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open file: " + path);
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line))
      throw DataError(path + ": truncated model file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  if (next_line() != kNeuralTag)
    throw DataError(path + ": not a cnn-bigru model file");

  auto field = [&](const std::string& key) {
    const auto cells = split_on(next_line(), ' ');
    if (cells.size() != 2 || cells[0] != key)
      throw DataError(path + ": expected field '" + key + "'");
    return cells[1];
  };
  auto int_field = [&](const std::string& key) {
    const auto v = parse_int(field(key));
    if (!v) throw DataError(path + ": bad field '" + key + "'");
    return static_cast<int>(*v);
  };

  NeuralModel model;
  model.spec.input_dim = int_field("input_dim");
  model.spec.filters = int_field("filters");
  model.spec.kernel = int_field("kernel");
  model.spec.hidden = int_field("hidden");
  const std::string padding = field("padding");
  if (padding == "same")
    model.spec.padding = Padding::kSame;
  else if (padding == "valid")
    model.spec.padding = Padding::kValid;
  else
    throw DataError(path + ": bad padding '" + padding + "'");
  model.spec.validate();

  const int n_scaler = int_field("scaler");
  if (n_scaler != model.spec.input_dim)
    throw DataError(path + ": scaler size does not match input_dim");
  Vec mins(n_scaler), maxs(n_scaler);
  std::vector<std::string> names;
  for (int j = 0; j < n_scaler; ++j) {
    const auto cells = split_on(next_line(), ' ');
    if (cells.size() != 3) throw DataError(path + ": bad scaler row");
    const auto lo = parse_double(cells[1]);
    const auto hi = parse_double(cells[2]);
    if (!lo || !hi) throw DataError(path + ": bad scaler row");
    names.push_back(cells[0]);
    mins[j] = *lo;
    maxs[j] = *hi;
  }
  model.scaler = Scaler(std::move(mins), std::move(maxs), std::move(names));

  const int n_params = int_field("params");
  if (n_params != model.spec.param_count())
    throw DataError(path + ": parameter count does not match spec");
  model.params.resize(n_params);
  for (int i = 0; i < n_params; ++i) {
    const auto v = parse_double(next_line());
    if (!v) throw DataError(path + ": bad parameter value");
    model.params[i] = *v;
  }
  return model;
}

}  // namespace lizard

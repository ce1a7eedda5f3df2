#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sector_rank/csv.hpp"
#include "sector_rank/predictors.hpp"

namespace sector_rank {

namespace {

constexpr int kCheckpointVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void scalar(std::string_view name, double v) { out_ << "scalar " << name << ' ' << csv::format(v) << '\n'; }
  void count(std::string_view name, std::size_t v) { out_ << "count " << name << ' ' << v << '\n'; }

  void matrix(std::string_view name, const Eigen::Ref<const Eigen::MatrixXd>& m) {
    out_ << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) out_ << (j ? " " : "") << csv::format(m(i, j));
      out_ << '\n';
    }
  }

  void scaler(const Standardizer& s) {
    matrix("feature_mean", s.feature_mean);
    matrix("feature_scale", s.feature_scale);
    scalar("target_mean", s.target_mean);
    scalar("target_scale", s.target_scale);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw std::runtime_error("checkpoint: unexpected end of input");
    return w;
  }

  void expect(std::string_view kind, std::string_view name) {
    const std::string k = word(), n = word();
    if (k != kind || n != name)
      throw std::runtime_error("checkpoint: expected '" + std::string(kind) + " " + std::string(name) + "', found '" +
                               k + " " + n + "'");
  }

  double number() {
    const std::string w = word();
    auto v = csv::parse_double(w);
    if (!v) throw std::runtime_error("checkpoint: bad number '" + w + "'");
    return *v;
  }

  std::size_t integer() {
    const std::string w = word();
    auto v = csv::parse_int(w);
    if (!v || *v < 0) throw std::runtime_error("checkpoint: bad count '" + w + "'");
    return static_cast<std::size_t>(*v);
  }

  double scalar(std::string_view name) {
    expect("scalar", name);
    return number();
  }

  std::size_t count(std::string_view name) {
    expect("count", name);
    return integer();
  }

  Eigen::MatrixXd matrix(std::string_view name) {
    expect("matrix", name);
    const auto r = static_cast<Eigen::Index>(integer()), c = static_cast<Eigen::Index>(integer());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = number();
    return m;
  }

  void matrix_into(std::string_view name, Eigen::MatrixXd& dst) {
    Eigen::MatrixXd m = matrix(name);
    if (m.rows() != dst.rows() || m.cols() != dst.cols())
      throw std::runtime_error("checkpoint: matrix '" + std::string(name) + "' has unexpected shape");
    dst = std::move(m);
  }

  Standardizer scaler() {
    Standardizer s;
    s.feature_mean = matrix("feature_mean");
    s.feature_scale = matrix("feature_scale");
    s.target_mean = scalar("target_mean");
    s.target_scale = scalar("target_scale");
    if (s.feature_mean.rows() != 1 || s.feature_scale.cols() != s.feature_mean.cols())
      throw std::runtime_error("checkpoint: malformed standardizer");
    return s;
  }

 private:
  std::istream& in_;
};

template <typename Network>
void write_network(Writer& w, const Network& net) {
  w.count("inputs", static_cast<std::size_t>(net.input_size()));
  w.count("layers", net.layers.size());
  for (const auto& l : net.layers) w.count("hidden", static_cast<std::size_t>(l.hidden_size()));
  w.count("relu_between_layers", net.relu_between_layers ? 1 : 0);
  std::size_t i = 0;
  net.visit([&](const Eigen::MatrixXd& m) { w.matrix("param" + std::to_string(i++), m); });
}

template <typename Network>
Network read_network(Reader& r) {
  using Layer = typename Network::LayerType;
  const auto inputs = static_cast<Eigen::Index>(r.count("inputs"));
  const std::size_t layers = r.count("layers");
  Network net;
  Eigen::Index in = inputs;
  for (std::size_t k = 0; k < layers; ++k) {
    const auto h = static_cast<Eigen::Index>(r.count("hidden"));
    net.layers.push_back(Layer::zeros(in, h));
    in = h;
  }
  net.relu_between_layers = r.count("relu_between_layers") != 0;
  net.readout_weights = Eigen::MatrixXd::Zero(1, in);
  net.readout_bias = Eigen::MatrixXd::Zero(1, 1);
  std::size_t i = 0;
  net.visit([&](Eigen::MatrixXd& m) { r.matrix_into("param" + std::to_string(i++), m); });
  return net;
}

}  // namespace

void save_checkpoint(std::ostream& out, const FittedPredictor& model) {
  Writer w(out);
  out << "sector-rank-checkpoint " << kCheckpointVersion << '\n';
  out << "model " << to_string(kind_of(model)) << '\n';
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        w.count("lookback", p.lookback);
        w.scaler(p.scaler);
        if constexpr (std::is_same_v<P, RidgePredictor>) {
          w.scalar("lambda", p.model.lambda);
          w.matrix("weights", p.model.weights);
          w.scalar("intercept", p.model.intercept);
        } else if constexpr (std::is_same_v<P, EsnPredictor>) {
          const EsnParams& e = p.network.params();
          w.scalar("leaking_rate", e.leaking_rate);
          w.scalar("spectral_radius", e.spectral_radius);
          w.scalar("density", e.density);
          w.scalar("input_scaling", e.input_scaling);
          w.scalar("readout_lambda", e.readout_lambda);
          w.count("washout", e.washout);
          w.matrix("input_weights", p.network.input_weights());
          w.matrix("reservoir", p.network.reservoir());
          w.matrix("readout_weights", p.network.readout().weights);
          w.scalar("readout_intercept", p.network.readout().intercept);
        } else {
          write_network(w, p.network);
        }
      },
      model);
  out << "end\n";
}

FittedPredictor load_checkpoint(std::istream& in) {
  Reader r(in);
  if (r.word() != "sector-rank-checkpoint") throw std::runtime_error("checkpoint: missing magic line");
  const std::size_t version = r.integer();
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  if (r.word() != "model") throw std::runtime_error("checkpoint: missing model line");
  const ModelKind kind = parse_model_kind(r.word());
  const std::size_t lookback = r.count("lookback");
  Standardizer scaler = r.scaler();

  FittedPredictor result;
  switch (kind) {
    case ModelKind::ridge: {
      RidgePredictor p{std::move(scaler), lookback, {}};
      p.model.lambda = r.scalar("lambda");
      p.model.weights = r.matrix("weights");
      p.model.intercept = r.scalar("intercept");
      result = std::move(p);
      break;
    }
    case ModelKind::lstm: result = LstmPredictor{std::move(scaler), lookback, read_network<LstmNetwork>(r), {}}; break;
    case ModelKind::gru: result = GruPredictor{std::move(scaler), lookback, read_network<GruNetwork>(r), {}}; break;
    case ModelKind::esn: {
      EsnParams e;
      e.leaking_rate = r.scalar("leaking_rate");
      e.spectral_radius = r.scalar("spectral_radius");
      e.density = r.scalar("density");
      e.input_scaling = r.scalar("input_scaling");
      e.readout_lambda = r.scalar("readout_lambda");
      e.washout = r.count("washout");
      Eigen::MatrixXd w_in = r.matrix("input_weights");
      Eigen::MatrixXd w = r.matrix("reservoir");
      EchoStateNetwork net(std::move(w_in), std::move(w), e);
      RidgeModel readout;
      readout.lambda = e.readout_lambda;
      readout.weights = r.matrix("readout_weights");
      readout.intercept = r.scalar("readout_intercept");
      net.set_readout(std::move(readout));
      result = EsnPredictor{std::move(scaler), lookback, std::move(net)};
      break;
    }
  }
  if (r.word() != "end") throw std::runtime_error("checkpoint: missing end marker");
  return result;
}

}  // namespace sector_rank

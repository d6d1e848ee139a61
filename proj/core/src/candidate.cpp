#include "odecert/candidate.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "odecert/manufactured.hpp"
#include "odecert/rng.hpp"

namespace odecert {

namespace {

std::vector<double> realify(std::span<const Complex> values, bool complex_state) {
  std::vector<double> out;
  if (complex_state) {
    out.reserve(2 * values.size());
    for (const Complex& v : values) {
      out.push_back(v.real());
      out.push_back(v.imag());
    }
  } else {
    out.reserve(values.size());
    for (const Complex& v : values) {
      if (v.imag() != 0.0) {
        throw std::invalid_argument("real-state problem has a complex initial condition");
      }
      out.push_back(v.real());
    }
  }
  return out;
}

}  // namespace

Reparametrization make_reparametrization(const OdeProblem& problem, ReparamKind kind) {
  Reparametrization rp;
  rp.kind = kind;
  rp.t0 = problem.domain.t0;

  std::vector<Complex> u0, u0p;
  if (const auto* fo = std::get_if<FirstOrderConstant>(&problem.kind)) {
    u0 = {fo->u0};
  } else if (const auto* ho = std::get_if<HigherOrderConstant>(&problem.kind)) {
    u0 = {ho->ics.at(0)};
    if (ho->ics.size() >= 2) u0p = {ho->ics[1]};
  } else if (const auto* sys = std::get_if<LinearSystem>(&problem.kind)) {
    u0 = sys->u0;
  } else if (const auto* nc = std::get_if<NonconstantFirstOrder>(&problem.kind)) {
    u0 = {nc->u0};
  }

  rp.u0 = realify(u0, problem.complex_state);
  if (!u0p.empty()) rp.u0_prime = realify(u0p, problem.complex_state);
  if (kind == ReparamKind::ExpSecondOrder && rp.u0_prime.empty()) {
    throw std::invalid_argument(
        "ExpSecondOrder reparametrization needs first-derivative initial conditions");
  }
  return rp;
}

Jet reparam_gate(const Reparametrization& reparam, const Jet& t_jet) {
  const Jet delta = t_jet - reparam.t0;
  switch (reparam.kind) {
    case ReparamKind::LagarisLinear: return delta;
    case ReparamKind::ExpFirstOrder: return 1.0 - jet_exp(-delta);
    case ReparamKind::ExpSecondOrder: return 1.0 - jet_exp(-(delta * delta));
  }
  return delta;
}

std::vector<Jet> reparametrize(std::span<const Jet> raw, const Reparametrization& reparam,
                               const Jet& t_jet) {
  if (raw.size() != reparam.u0.size()) {
    throw std::invalid_argument("reparametrize: output dimension mismatch");
  }
  if (reparam.kind == ReparamKind::ExpSecondOrder && reparam.u0_prime.size() != raw.size()) {
    throw std::invalid_argument("reparametrize: missing u0' for ExpSecondOrder");
  }
  const Jet gate = reparam_gate(reparam, t_jet);
  const Jet delta = t_jet - reparam.t0;
  std::vector<Jet> out(raw.size());
  for (size_t c = 0; c < raw.size(); ++c) {
    Jet u = gate * raw[c];
    u += reparam.u0[c];
    if (reparam.kind == ReparamKind::ExpSecondOrder) u += delta * reparam.u0_prime[c];
    out[c] = u;
  }
  return out;
}

std::vector<Jet> jet_eval(const Candidate& candidate, double t, int order) {
  if (order < 0 || order > Jet::kMaxOrder) {
    throw std::invalid_argument("jet_eval: order " + std::to_string(order) +
                                " exceeds supported maximum " + std::to_string(Jet::kMaxOrder));
  }
  std::vector<Jet> out(candidate.output_dim(), Jet(order));
  candidate.eval_jets(t, order, out);
  return out;
}

Mlp::Mlp(std::vector<int> hidden, int output_dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  int in = 1;
  auto add_layer = [&](int out) {
    MlpLayer layer;
    layer.in = in;
    layer.out = out;
    layer.w.resize(static_cast<size_t>(out) * in);
    layer.b.assign(out, 0.0);
    const double bound = std::sqrt(1.0 / in);
    for (double& w : layer.w) w = uniform_open(gen, -bound, bound);
    for (double& b : layer.b) b = uniform_open(gen, -bound, bound);
    layers_.push_back(std::move(layer));
    in = out;
  };
  for (int h : hidden) add_layer(h);
  add_layer(output_dim);
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.w.size() + l.b.size();
  return n;
}

void Mlp::flatten_params(std::vector<double>& out) const {
  out.clear();
  out.reserve(param_count());
  for (const auto& l : layers_) {
    out.insert(out.end(), l.w.begin(), l.w.end());
    out.insert(out.end(), l.b.begin(), l.b.end());
  }
}

void Mlp::load_params(std::span<const double> params) {
  size_t pos = 0;
  for (auto& l : layers_) {
    std::memcpy(l.w.data(), params.data() + pos, l.w.size() * sizeof(double));
    pos += l.w.size();
    std::memcpy(l.b.data(), params.data() + pos, l.b.size() * sizeof(double));
    pos += l.b.size();
  }
}

void Mlp::forward(const Jet& t_jet, Workspace& ws) const {
  const int order = t_jet.order();
  ws.acts.resize(layers_.size() + 1);
  ws.acts[0].assign(1, t_jet);
  for (size_t l = 0; l < layers_.size(); ++l) {
    const MlpLayer& layer = layers_[l];
    const std::vector<Jet>& in = ws.acts[l];
    std::vector<Jet>& out = ws.acts[l + 1];
    out.assign(layer.out, Jet(order));
    const bool is_last = (l + 1 == layers_.size());
    for (int i = 0; i < layer.out; ++i) {
      Jet z(order);
      z.coeff(0) = layer.b[i];
      const double* wrow = layer.w.data() + static_cast<size_t>(i) * layer.in;
      for (int j = 0; j < layer.in; ++j) {
        const double w = wrow[j];
        for (int k = 0; k <= order; ++k) z.coeff(k) += w * in[j].coeff(k);
      }
      out[i] = is_last ? z : jet_tanh(z);
    }
  }
}

std::vector<Jet> Mlp::forward(const Jet& t_jet) const {
  Workspace ws;
  forward(t_jet, ws);
  return ws.acts.back();
}

void Mlp::backward(const Workspace& ws, std::span<const Jet> out_bar,
                   std::span<double> grad_accum) const {
  const int order = ws.acts[0][0].order();
  std::vector<Jet> cur_bar(out_bar.begin(), out_bar.end());
  std::vector<Jet> prev_bar;

  // Flat offsets of each layer's parameters.
  std::vector<size_t> offsets(layers_.size());
  size_t pos = 0;
  for (size_t l = 0; l < layers_.size(); ++l) {
    offsets[l] = pos;
    pos += layers_[l].w.size() + layers_[l].b.size();
  }

  for (size_t li = layers_.size(); li-- > 0;) {
    const MlpLayer& layer = layers_[li];
    const std::vector<Jet>& in = ws.acts[li];
    const bool is_last = (li + 1 == layers_.size());

    // Adjoint of the pre-activation. The jet-lift of tanh has differential
    // "multiply by the series w = 1 - y^2", so its adjoint is the
    // correlation z_bar[m] = sum_{k>=m} a_bar[k] w[k-m].
    std::vector<Jet> z_bar;
    if (is_last) {
      z_bar = std::move(cur_bar);
    } else {
      const std::vector<Jet>& a = ws.acts[li + 1];
      z_bar.assign(layer.out, Jet(order));
      for (int i = 0; i < layer.out; ++i) {
        Jet w(order);
        for (int k = 0; k <= order; ++k) {
          double s = 0.0;
          for (int j = 0; j <= k; ++j) s += a[i].coeff(j) * a[i].coeff(k - j);
          w.coeff(k) = (k == 0 ? 1.0 : 0.0) - s;
        }
        for (int m = 0; m <= order; ++m) {
          double s = 0.0;
          for (int k = m; k <= order; ++k) s += cur_bar[i].coeff(k) * w.coeff(k - m);
          z_bar[i].coeff(m) = s;
        }
      }
    }

    double* wgrad = grad_accum.data() + offsets[li];
    double* bgrad = wgrad + layer.w.size();
    if (li > 0) prev_bar.assign(layer.in, Jet(order));
    for (int i = 0; i < layer.out; ++i) {
      const double* wrow = layers_[li].w.data() + static_cast<size_t>(i) * layer.in;
      double* grow = wgrad + static_cast<size_t>(i) * layer.in;
      for (int j = 0; j < layer.in; ++j) {
        double dot = 0.0;
        for (int k = 0; k <= order; ++k) dot += z_bar[i].coeff(k) * in[j].coeff(k);
        grow[j] += dot;
        if (li > 0) {
          const double w = wrow[j];
          for (int k = 0; k <= order; ++k) prev_bar[j].coeff(k) += w * z_bar[i].coeff(k);
        }
      }
      bgrad[i] += z_bar[i].coeff(0);
    }
    cur_bar = std::move(prev_bar);
    prev_bar.clear();
  }
}

void ReparametrizedMlp::eval_jets(double t, int order, std::span<Jet> out) const {
  const Jet t_jet = Jet::variable(t, order);
  const std::vector<Jet> raw = mlp_.forward(t_jet);
  std::vector<Jet> u = reparametrize(raw, reparam_, t_jet);
  for (size_t i = 0; i < u.size(); ++i) out[i] = u[i];
}

void ClosedFormCandidate::eval_jets(double t, int order, std::span<Jet> out) const {
  std::vector<Jet> v = fn_(Jet::variable(t, order));
  if (static_cast<int>(v.size()) != dim_) {
    throw std::logic_error("closed-form candidate returned wrong dimension");
  }
  for (int i = 0; i < dim_; ++i) out[i] = v[i];
}

std::unique_ptr<Candidate> synthetic_constant_residual_candidate(const ManufacturedCase& mcase,
                                                                 double epsilon) {
  const auto* fo = std::get_if<FirstOrderConstant>(&mcase.problem.kind);
  if (!fo) {
    throw std::invalid_argument("synthetic constant-residual candidate needs a first-order "
                                "constant-coefficient problem");
  }
  if (fo->root.omega != 0.0) {
    throw std::invalid_argument("synthetic constant-residual candidate requires omega = 0");
  }
  const double lambda = fo->root.lambda;
  const double t0 = mcase.problem.domain.t0;
  VectorFn exact = mcase.exact;
  VectorFn fn = [exact, lambda, t0, epsilon](const Jet& t) {
    std::vector<Jet> v = exact(t);
    const Jet delta = t - t0;
    Jet dev = (lambda == 0.0) ? epsilon * delta
                              : (epsilon / lambda) * (1.0 - jet_exp(-lambda * delta));
    v[0] += dev;
    return v;
  };
  return std::make_unique<ClosedFormCandidate>(
      std::move(fn), mcase.problem.state_dim(),
      mcase.name + "+const-residual(eps=" + std::to_string(epsilon) + ")");
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

struct ByteReader {
  const std::uint8_t* p;
  const std::uint8_t* end;
  std::uint32_t u32() {
    if (end - p < 4) throw std::runtime_error("truncated candidate snapshot");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    p += 4;
    return v;
  }
  double f64() {
    if (end - p < 8) throw std::runtime_error("truncated candidate snapshot");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    p += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

constexpr std::uint32_t kSnapshotMagic = 0x43454400;  // "\0DEC"
constexpr std::uint32_t kSnapshotVersion = 1;

}  // namespace

std::vector<std::uint8_t> snapshot_bytes(const ReparametrizedMlp& candidate) {
  std::vector<std::uint8_t> out;
  put_u32(out, kSnapshotMagic);
  put_u32(out, kSnapshotVersion);
  const auto& layers = candidate.mlp().layers();
  put_u32(out, static_cast<std::uint32_t>(layers.size()));
  for (const auto& l : layers) {
    put_u32(out, static_cast<std::uint32_t>(l.in));
    put_u32(out, static_cast<std::uint32_t>(l.out));
    for (double w : l.w) put_f64(out, w);
    for (double b : l.b) put_f64(out, b);
  }
  const auto& rp = candidate.reparam();
  put_u32(out, static_cast<std::uint32_t>(rp.kind));
  put_f64(out, rp.t0);
  put_u32(out, static_cast<std::uint32_t>(rp.u0.size()));
  for (double v : rp.u0) put_f64(out, v);
  put_u32(out, rp.u0_prime.empty() ? 0u : 1u);
  for (double v : rp.u0_prime) put_f64(out, v);
  return out;
}

void save_snapshot(const ReparametrizedMlp& candidate, const std::string& path) {
  const std::vector<std::uint8_t> bytes = snapshot_bytes(candidate);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("failed writing snapshot to '" + path + "'");
}

ReparametrizedMlp load_snapshot(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open candidate snapshot '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  ByteReader r{bytes.data(), bytes.data() + bytes.size()};
  if (r.u32() != kSnapshotMagic) throw std::runtime_error("'" + path + "' is not a candidate snapshot");
  const std::uint32_t version = r.u32();
  if (version != kSnapshotVersion) {
    throw std::runtime_error("unsupported snapshot version " + std::to_string(version));
  }
  Mlp mlp;
  const std::uint32_t n_layers = r.u32();
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    MlpLayer l;
    l.in = static_cast<int>(r.u32());
    l.out = static_cast<int>(r.u32());
    l.w.resize(static_cast<size_t>(l.in) * l.out);
    l.b.resize(l.out);
    for (double& w : l.w) w = r.f64();
    for (double& b : l.b) b = r.f64();
    mlp.layers().push_back(std::move(l));
  }
  Reparametrization rp;
  rp.kind = static_cast<ReparamKind>(r.u32());
  rp.t0 = r.f64();
  const std::uint32_t dim = r.u32();
  rp.u0.resize(dim);
  for (double& v : rp.u0) v = r.f64();
  if (r.u32() != 0) {
    rp.u0_prime.resize(dim);
    for (double& v : rp.u0_prime) v = r.f64();
  }
  return ReparametrizedMlp(std::move(mlp), std::move(rp));
}

std::string ReparametrizedMlp::digest() const {
  // FNV-1a over the snapshot bytes; enough to pin a certificate to the
  // exact checkpoint it was computed from.
  const std::vector<std::uint8_t> bytes = snapshot_bytes(*this);
  std::uint64_t h = 1469598103934665603ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("mlp:") + buf;
}

}  // namespace odecert

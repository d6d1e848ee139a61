#ifndef ODECERT_CANDIDATE_HPP
#define ODECERT_CANDIDATE_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "odecert/jet.hpp"
#include "odecert/problem.hpp"

namespace odecert {

struct ManufacturedCase;

/// Fixed transforms of the raw network output that force exact satisfaction
/// of the initial conditions, independent of the weights.
enum class ReparamKind { LagarisLinear, ExpFirstOrder, ExpSecondOrder };

struct Reparametrization {
  ReparamKind kind = ReparamKind::ExpFirstOrder;
  double t0 = 0.0;
  std::vector<double> u0;        // realified, one entry per state component
  std::vector<double> u0_prime;  // required for ExpSecondOrder
};

/// Builds the reparametrization for a problem's initial data (realified).
/// ExpSecondOrder requires the problem to carry first-derivative initial
/// conditions (order >= 2).
Reparametrization make_reparametrization(const OdeProblem& problem, ReparamKind kind);

/// Applies the reparametrization in jet arithmetic:
///   LagarisLinear:  u = u0 + (t - t0) * NN(t)
///   ExpFirstOrder:  u = u0 + (1 - exp(-(t - t0))) * NN(t)
///   ExpSecondOrder: u = u0 + (t - t0) u0' + (1 - exp(-(t - t0)^2)) * NN(t)
std::vector<Jet> reparametrize(std::span<const Jet> raw, const Reparametrization& reparam,
                               const Jet& t_jet);

/// The multiplicative gate in front of NN(t); the trainer pulls adjoints
/// back through it.
Jet reparam_gate(const Reparametrization& reparam, const Jet& t_jet);

/// An approximate solution that can be evaluated with exact derivatives.
class Candidate {
 public:
  virtual ~Candidate() = default;
  virtual int output_dim() const = 0;
  virtual void eval_jets(double t, int order, std::span<Jet> out) const = 0;
  virtual std::string digest() const = 0;
};

/// Exact k-th derivatives of the candidate at t, one jet per component.
/// Throws std::invalid_argument when order exceeds Jet::kMaxOrder.
std::vector<Jet> jet_eval(const Candidate& candidate, double t, int order);

struct MlpLayer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // row-major [out][in]
  std::vector<double> b;
};

/// Fully connected tanh network, scalar input t.
class Mlp {
 public:
  Mlp() = default;
  /// hidden: widths of the hidden layers; weights drawn uniformly from
  /// [-sqrt(1/fan_in), sqrt(1/fan_in)] with the given seed.
  Mlp(std::vector<int> hidden, int output_dim, std::uint64_t seed);

  int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<MlpLayer>& layers() const { return layers_; }
  std::vector<MlpLayer>& layers() { return layers_; }

  std::size_t param_count() const;
  void flatten_params(std::vector<double>& out) const;
  void load_params(std::span<const double> params);

  /// Raw network output jets (before any reparametrization).
  std::vector<Jet> forward(const Jet& t_jet) const;

  /// Forward pass that keeps the per-layer activations needed by backward().
  struct Workspace {
    std::vector<std::vector<Jet>> acts;  // acts[0] = input, acts.back() = output
  };
  void forward(const Jet& t_jet, Workspace& ws) const;

  /// Reverse accumulation through the jet-forward pass: given adjoints of
  /// the output jets, accumulates parameter gradients (flat layout matching
  /// flatten_params) and consumes the workspace of the matching forward().
  void backward(const Workspace& ws, std::span<const Jet> out_bar,
                std::span<double> grad_accum) const;

 private:
  std::vector<MlpLayer> layers_;
};

class ReparametrizedMlp : public Candidate {
 public:
  ReparametrizedMlp() = default;
  ReparametrizedMlp(Mlp mlp, Reparametrization reparam)
      : mlp_(std::move(mlp)), reparam_(std::move(reparam)) {}

  int output_dim() const override { return mlp_.output_dim(); }
  void eval_jets(double t, int order, std::span<Jet> out) const override;
  std::string digest() const override;

  const Mlp& mlp() const { return mlp_; }
  Mlp& mlp() { return mlp_; }
  const Reparametrization& reparam() const { return reparam_; }

 private:
  Mlp mlp_;
  Reparametrization reparam_;
};

/// Wraps a closed-form function (catalog entry, exact solution, synthetic
/// perturbation) as a candidate.
class ClosedFormCandidate : public Candidate {
 public:
  ClosedFormCandidate(VectorFn fn, int dim, std::string label)
      : fn_(std::move(fn)), dim_(dim), label_(std::move(label)) {}

  int output_dim() const override { return dim_; }
  void eval_jets(double t, int order, std::span<Jet> out) const override;
  std::string digest() const override { return "closed-form:" + label_; }

 private:
  VectorFn fn_;
  int dim_;
  std::string label_;
};

/// Sharpness probe for the first-order constant class: the exact solution
/// plus the deviation eps*(1 - exp(-lambda (t-t0)))/lambda (eps*(t-t0) when
/// lambda = 0), whose residual is identically eps. Requires a real problem
/// (omega = 0).
std::unique_ptr<Candidate> synthetic_constant_residual_candidate(const ManufacturedCase& mcase,
                                                                 double epsilon);

/// Candidate snapshot serialization. The format is a flat little-endian
/// binary dump (version tag, layer shapes, row-major weights, biases,
/// reparametrization) and round-trips doubles bit-exactly.
void save_snapshot(const ReparametrizedMlp& candidate, const std::string& path);
ReparametrizedMlp load_snapshot(const std::string& path);
std::vector<std::uint8_t> snapshot_bytes(const ReparametrizedMlp& candidate);

}  // namespace odecert

#endif  // ODECERT_CANDIDATE_HPP

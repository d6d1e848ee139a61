#include "odecert/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "odecert/parallel.hpp"
#include "odecert/residual.hpp"
#include "odecert/rng.hpp"

namespace odecert {

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (samples_per_epoch < 1) throw std::invalid_argument("samples_per_epoch must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in (0, 1)");
  }
  if (validation_points < 1) throw std::invalid_argument("validation_points must be >= 1");
}

namespace {

/// Forward + residual for one sample; returns the squared residual norm and
/// optionally backpropagates into grad (sized mlp.param_count()).
double sample_sq_residual(const OdeProblem& problem, const Mlp& mlp,
                          const Reparametrization& reparam, double t, double weight,
                          std::span<double> grad_or_empty) {
  const int order = problem.operator_order();
  const Jet t_jet = Jet::variable(t, order);

  Mlp::Workspace ws;
  mlp.forward(t_jet, ws);
  const std::vector<Jet>& raw = ws.acts.back();
  const std::vector<Jet> state = reparametrize(raw, reparam, t_jet);

  std::vector<Complex> r(problem.complex_dim());
  apply_operator(problem, t, state, r);
  std::vector<Complex> f(problem.complex_dim());
  problem.forcing(t, f);
  double sq = 0.0;
  for (size_t i = 0; i < r.size(); ++i) {
    r[i] -= f[i];
    sq += std::norm(r[i]);
  }

  if (!grad_or_empty.empty() && std::isfinite(sq)) {
    // d(weight * sum |r|^2) pulled back to the state jets, then through the
    // reparametrization gate (u = base + gate*y), then through the network.
    std::vector<Jet> state_bar(state.size(), Jet(order));
    residual_accumulate_adjoint(problem, t, r, weight, state_bar);

    const Jet gate = reparam_gate(reparam, t_jet);
    std::vector<Jet> raw_bar(state.size(), Jet(order));
    for (size_t c = 0; c < state.size(); ++c) {
      for (int m = 0; m <= order; ++m) {
        double s = 0.0;
        for (int k = m; k <= order; ++k) s += state_bar[c].coeff(k) * gate.coeff(k - m);
        raw_bar[c].coeff(m) = s;
      }
    }
    mlp.backward(ws, raw_bar, grad_or_empty);
  }
  return sq;
}

struct ReduceBuffers {
  std::vector<std::vector<double>> grads;  // one per slot (empty if unused)
  std::vector<double> losses;
  ReduceBuffers(int slots, size_t params, bool with_grad)
      : grads(slots), losses(static_cast<size_t>(slots), 0.0) {
    if (with_grad) {
      for (auto& g : grads) g.assign(params, 0.0);
    }
  }
};

}  // namespace

double loss(const OdeProblem& problem, const Candidate& candidate,
            std::span<const double> sample_points, double domain_length) {
  const int order = problem.operator_order();
  double sum = 0.0;
  for (double t : sample_points) {
    const std::vector<Jet> state = jet_eval(candidate, t, order);
    std::vector<Complex> r(problem.complex_dim());
    apply_operator(problem, t, state, r);
    std::vector<Complex> f(problem.complex_dim());
    problem.forcing(t, f);
    for (size_t i = 0; i < r.size(); ++i) sum += std::norm(r[i] - f[i]);
  }
  return domain_length / static_cast<double>(sample_points.size()) * sum;
}

double loss_and_gradient(const OdeProblem& problem, const Reparametrization& reparam,
                         const Mlp& mlp, std::span<const double> sample_points,
                         double domain_length, std::span<double> grad, int threads) {
  const double weight = domain_length / static_cast<double>(sample_points.size());
  std::fill(grad.begin(), grad.end(), 0.0);
  ReduceBuffers buffers(kReduceSlots, mlp.param_count(), true);
  double total = 0.0;
  chunked_reduce(
      sample_points.size(), 64, threads,
      [&](int slot) {
        buffers.losses[slot] = 0.0;
        std::fill(buffers.grads[slot].begin(), buffers.grads[slot].end(), 0.0);
      },
      [&](std::size_t begin, std::size_t end, int slot) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
          s += sample_sq_residual(problem, mlp, reparam, sample_points[i], weight,
                                  buffers.grads[slot]);
        }
        buffers.losses[slot] = s;
      },
      [&](int slot) {
        total += buffers.losses[slot];
        for (size_t k = 0; k < grad.size(); ++k) grad[k] += buffers.grads[slot][k];
      });
  return weight * total;
}

std::pair<ReparametrizedMlp, TrainReport> train(const OdeProblem& problem,
                                                const Reparametrization& reparam,
                                                std::vector<int> hidden_widths,
                                                const TrainConfig& config) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();

  std::mt19937_64 gen(config.seed);
  Mlp mlp(hidden_widths, problem.state_dim(), gen());

  const size_t n_params = mlp.param_count();
  std::vector<double> params;
  mlp.flatten_params(params);
  std::vector<double> adam_m(n_params, 0.0), adam_v(n_params, 0.0);
  std::vector<double> grad(n_params, 0.0);

  const double sample_len = config.sample_domain.length();
  const int n_samples = config.samples_per_epoch;
  const double weight = sample_len / n_samples;

  // Fixed validation grid at cell midpoints: stays strictly inside the
  // sample domain, where forcings like ln(1+t) on [-1, 4] blow up at the
  // boundary.
  std::vector<double> validation;
  validation.reserve(config.validation_points);
  for (int i = 0; i < config.validation_points; ++i) {
    validation.push_back(config.sample_domain.t0 +
                         sample_len * ((i + 0.5) / config.validation_points));
  }

  TrainReport report;
  std::vector<double> best_params = params;
  double best_val = std::numeric_limits<double>::infinity();

  const int n_chunks = 64;
  ReduceBuffers buffers(kReduceSlots, n_params, true);
  std::vector<double> samples(n_samples);

  auto validation_loss = [&]() {
    double total = 0.0;
    chunked_reduce(
        validation.size(), n_chunks, config.threads,
        [&](int slot) { buffers.losses[slot] = 0.0; },
        [&](std::size_t begin, std::size_t end, int slot) {
          double s = 0.0;
          for (std::size_t i = begin; i < end; ++i) {
            s += sample_sq_residual(problem, mlp, reparam, validation[i], 0.0, {});
          }
          buffers.losses[slot] = s;
        },
        [&](int slot) { total += buffers.losses[slot]; });
    return sample_len / static_cast<double>(validation.size()) * total;
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (int i = 0; i < n_samples; ++i) {
      samples[i] = uniform_open(gen, config.sample_domain.t0, config.sample_domain.t1);
    }

    std::fill(grad.begin(), grad.end(), 0.0);
    double epoch_loss = 0.0;
    chunked_reduce(
        static_cast<std::size_t>(n_samples), n_chunks, config.threads,
        [&](int slot) {
          buffers.losses[slot] = 0.0;
          std::fill(buffers.grads[slot].begin(), buffers.grads[slot].end(), 0.0);
        },
        [&](std::size_t begin, std::size_t end, int slot) {
          double s = 0.0;
          for (std::size_t i = begin; i < end; ++i) {
            s += sample_sq_residual(problem, mlp, reparam, samples[i], weight,
                                    buffers.grads[slot]);
          }
          buffers.losses[slot] = s;
        },
        [&](int slot) {
          epoch_loss += buffers.losses[slot];
          const std::vector<double>& g = buffers.grads[slot];
          for (size_t k = 0; k < n_params; ++k) grad[k] += g[k];
        });
    epoch_loss *= weight;

    if (!std::isfinite(epoch_loss)) {
      report.diverged = true;
      break;
    }
    report.loss_history.push_back(epoch_loss);

    const double bc1 = 1.0 - std::pow(config.beta1, epoch + 1);
    const double bc2 = 1.0 - std::pow(config.beta2, epoch + 1);
    for (size_t k = 0; k < n_params; ++k) {
      adam_m[k] = config.beta1 * adam_m[k] + (1.0 - config.beta1) * grad[k];
      adam_v[k] = config.beta2 * adam_v[k] + (1.0 - config.beta2) * grad[k] * grad[k];
      params[k] -= config.learning_rate * (adam_m[k] / bc1) /
                   (std::sqrt(adam_v[k] / bc2) + config.adam_epsilon);
    }
    mlp.load_params(params);

    const double val = validation_loss();
    if (!std::isfinite(val)) {
      report.diverged = true;
      report.loss_history.pop_back();
      break;
    }
    report.validation_history.push_back(val);
    if (val < best_val) {
      best_val = val;
      best_params = params;
      report.best_epoch = epoch;
    }
  }

  if (report.best_epoch >= 0) {
    report.best_validation_loss = best_val;
    mlp.load_params(best_params);
  } else {
    // 0 epochs (or divergence on the first): hand back the initialization.
    mlp.load_params(best_params);
    report.best_validation_loss = std::numeric_limits<double>::quiet_NaN();
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {ReparametrizedMlp(std::move(mlp), reparam), std::move(report)};
}

std::pair<ReparametrizedMlp, TrainReport> train_case(const ManufacturedCase& mcase,
                                                     TrainConfig config) {
  config.sample_domain = mcase.hints.sample_domain;
  const Reparametrization reparam = make_reparametrization(mcase.problem, mcase.hints.reparam);
  return train(mcase.problem, reparam, {mcase.hints.hidden_width, mcase.hints.hidden_width},
               config);
}

}  // namespace odecert

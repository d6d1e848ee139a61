#ifndef ODECERT_TRAINER_HPP
#define ODECERT_TRAINER_HPP

#include <span>
#include <vector>

#include "odecert/candidate.hpp"
#include "odecert/manufactured.hpp"
#include "odecert/problem.hpp"

namespace odecert {

struct TrainConfig {
  int epochs = 1000;
  int samples_per_epoch = 1024;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  Interval sample_domain{0.0, 3.0};
  int validation_points = 512;
  int threads = 1;

  void validate() const;
};

struct TrainReport {
  std::vector<double> loss_history;        // training loss per epoch
  std::vector<double> validation_history;  // validation loss per epoch
  int best_epoch = -1;
  double best_validation_loss = 0.0;
  double wall_time_seconds = 0.0;
  bool diverged = false;
};

/// Discretized L2 residual loss (|I|/N) sum ||Ru(t_i)||^2 over the sample
/// points, with |I| the sample-domain length.
double loss(const OdeProblem& problem, const Candidate& candidate,
            std::span<const double> sample_points, double domain_length);

/// Loss plus its gradient with respect to the flattened network parameters
/// (reverse accumulation through the jet forward pass). grad must have
/// mlp.param_count() entries and is overwritten. The reduction order is
/// fixed, so results are identical for any thread count.
double loss_and_gradient(const OdeProblem& problem, const Reparametrization& reparam,
                         const Mlp& mlp, std::span<const double> sample_points,
                         double domain_length, std::span<double> grad, int threads = 1);

/// Trains an MLP with the given hidden widths by Adam on the residual loss,
/// sampling `samples_per_epoch` points uniformly from the sample domain each
/// epoch and keeping the weight snapshot with the lowest validation loss
/// (validation = fixed midpoint grid on the sample domain). Deterministic
/// for a fixed seed regardless of thread count. A non-finite loss aborts
/// training, returning the last finite best snapshot with diverged = true.
std::pair<ReparametrizedMlp, TrainReport> train(const OdeProblem& problem,
                                                const Reparametrization& reparam,
                                                std::vector<int> hidden_widths,
                                                const TrainConfig& config);

/// Case-level convenience: architecture, sample domain and reparametrization
/// from the case's training hints.
std::pair<ReparametrizedMlp, TrainReport> train_case(const ManufacturedCase& mcase,
                                                     TrainConfig config);

}  // namespace odecert

#endif  // ODECERT_TRAINER_HPP

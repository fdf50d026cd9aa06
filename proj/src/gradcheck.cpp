#include "evpirank/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "evpirank/error.hpp"

namespace evpirank {
namespace {

double finite_or_throw(double value, const char* where) {
  if (!std::isfinite(value)) throw NumericError(std::string("grad_check: non-finite loss ") + where);
  return value;
}

}  // namespace

GradCheckReport grad_check(const LossFunction& loss, const TensorList& params, std::size_t n_probes, Rng& rng,
                           double step) {
  std::vector<DenseMatrix> storage;
  storage.reserve(params.size());
  TensorList grads;
  for (const auto& p : params) storage.emplace_back(p.tensor->rows(), p.tensor->cols());
  for (std::size_t i = 0; i < params.size(); ++i) grads.push_back({params[i].name, &storage[i]});

  finite_or_throw(loss(&grads), "at the base point");

  const std::size_t total = parameter_count(params);
  GradCheckReport report;
  if (total == 0) return report;
  for (std::size_t n = 0; n < n_probes; ++n) {
    std::size_t flat = rng.below(total);
    std::size_t t = 0;
    while (flat >= params[t].tensor->size()) {
      flat -= params[t].tensor->size();
      ++t;
    }
    double& x = params[t].tensor->values()[flat];
    const double saved = x;
    x = saved + step;
    const double up = finite_or_throw(loss(nullptr), "at +step");
    x = saved - step;
    const double down = finite_or_throw(loss(nullptr), "at -step");
    x = saved;

    GradProbe probe;
    probe.tensor = params[t].name;
    probe.index = flat;
    probe.analytic = storage[t].values()[flat];
    probe.numeric = (up - down) / (2.0 * step);
    probe.relative_error =
        std::abs(probe.analytic - probe.numeric) / std::max(1e-8, std::abs(probe.analytic) + std::abs(probe.numeric));
    report.max_relative_error = std::max(report.max_relative_error, probe.relative_error);
    report.probes.push_back(std::move(probe));
  }
  return report;
}

}  // namespace evpirank

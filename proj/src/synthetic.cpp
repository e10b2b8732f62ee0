#include "dqf/synthetic.hpp"

#include <random>
#include <stdexcept>

namespace dqf {

VectorDataset gaussian_mixture(const MixtureParams& params) {
  if (params.count == 0 || params.dim == 0 || params.clusters == 0)
    throw std::invalid_argument("gaussian_mixture: count, dim and clusters must be positive");
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> centers(params.clusters * params.dim);
  for (auto& c : centers) c = params.clusters == 1 ? 0.0 : normal(rng) * params.center_spread;

  std::uniform_int_distribution<std::size_t> pick(0, params.clusters - 1);
  std::vector<float> data(params.count * params.dim);
  for (std::size_t i = 0; i < params.count; ++i) {
    const std::size_t c = pick(rng);
    for (std::size_t j = 0; j < params.dim; ++j)
      data[i * params.dim + j] = static_cast<float>(centers[c * params.dim + j] + normal(rng));
  }
  return VectorDataset(params.dim, std::move(data));
}

}  // namespace dqf

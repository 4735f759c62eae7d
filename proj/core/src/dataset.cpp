#include "koopgen/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "koopgen/error.hpp"
#include "koopgen/quadrature.hpp"

namespace koopgen {

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  if (count <= 0) return;
  if (workers == 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto run = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

Matrix SnapshotDataset::uniform_slice(int k) const {
  if (!has_uniform() || k < 0 || k > gamma_count) {
    throw InvalidArgument("uniform_slice: index out of range or no uniform samples");
  }
  Matrix out(size(), dim);
  for (int m = 0; m < size(); ++m) out.row(m) = uniform_states[static_cast<std::size_t>(m)].row(k);
  return out;
}

void SnapshotDataset::validate() const {
  const int M = size();
  if (dim < 1 || gamma_count < 1 || !(T > 0.0)) {
    throw InvalidArgument("dataset: need dim >= 1, Gamma >= 1 and T > 0");
  }
  if (initial.cols() != dim || endpoint.rows() != M || endpoint.cols() != dim) {
    throw ShapeMismatch("dataset: initial/endpoint shapes disagree");
  }
  if (!initial.allFinite() || !endpoint.allFinite()) {
    throw NumericalFailure("dataset: non-finite states");
  }
  if (has_gl()) {
    if (static_cast<int>(gl_states.size()) != M || static_cast<int>(gl_times.size()) != gamma_count) {
      throw ShapeMismatch("dataset: Gauss-Legendre samples have the wrong shape");
    }
    for (const auto& s : gl_states) {
      if (s.rows() != gamma_count || s.cols() != dim) throw ShapeMismatch("dataset: GL block");
      if (!s.allFinite()) throw NumericalFailure("dataset: non-finite states");
    }
  }
  if (has_uniform()) {
    if (static_cast<int>(uniform_states.size()) != M ||
        static_cast<int>(uniform_times.size()) != gamma_count + 1) {
      throw ShapeMismatch("dataset: uniform samples have the wrong shape");
    }
    for (const auto& s : uniform_states) {
      if (s.rows() != gamma_count + 1 || s.cols() != dim) {
        throw ShapeMismatch("dataset: uniform block");
      }
      if (!s.allFinite()) throw NumericalFailure("dataset: non-finite states");
    }
  }
}

SnapshotDataset generate_dataset(const SystemSpec& spec, const Matrix& x0s, double T,
                                 int gamma_count, const DatasetOptions& options) {
  if (!(T > 0.0)) throw InvalidArgument("generate_dataset: T must be positive");
  if (gamma_count < 1) throw InvalidArgument("generate_dataset: Gamma must be >= 1");
  if (x0s.cols() != spec.dim) throw ShapeMismatch("generate_dataset: x0 has wrong dimension");

  SnapshotDataset d;
  d.dim = spec.dim;
  d.T = T;
  d.gamma_count = gamma_count;
  d.initial = x0s;
  if (options.gl) d.gl_times = gl_rule(T, gamma_count).nodes;
  if (options.uniform) {
    for (int k = 0; k <= gamma_count; ++k) d.uniform_times.push_back(T * k / gamma_count);
    d.uniform_times.back() = T;
  }
  // One solve per trajectory over the merged time grid.
  std::vector<double> times = d.gl_times;
  times.insert(times.end(), d.uniform_times.begin(), d.uniform_times.end());
  times.push_back(T);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  auto index_of = [&](double t) {
    return static_cast<Eigen::Index>(std::lower_bound(times.begin(), times.end(), t) -
                                     times.begin());
  };

  const int M = static_cast<int>(x0s.rows());
  const int dim = spec.dim;
  if (options.gl) d.gl_states.assign(static_cast<std::size_t>(M), Matrix());
  if (options.uniform) d.uniform_states.assign(static_cast<std::size_t>(M), Matrix());
  d.endpoint.resize(M, dim);
  d.status.assign(static_cast<std::size_t>(M), TrajectoryStatus::kOk);
  const bool exact = options.use_exact_flow && spec.exact_flow && !spec.recast_boundary;

  parallel_for(M, options.workers, [&](int m) {
    const Vector x0 = x0s.row(m).transpose();
    Matrix states(static_cast<Eigen::Index>(times.size()), dim);
    if (exact) {
      std::vector<double> out(static_cast<std::size_t>(dim));
      for (std::size_t k = 0; k < times.size(); ++k) {
        spec.exact_flow(times[k], std::span<const double>(x0.data(), static_cast<std::size_t>(dim)),
                        out);
        for (int a = 0; a < dim; ++a) {
          states(static_cast<Eigen::Index>(k), a) = out[static_cast<std::size_t>(a)];
        }
      }
    } else {
      Trajectory tr = integrate(spec, std::span<const double>(x0.data(), static_cast<std::size_t>(dim)),
                                times, options.integrator);
      d.status[static_cast<std::size_t>(m)] = tr.status;
      if (tr.status != TrajectoryStatus::kOk) {
        throw NumericalFailure("generate_dataset: trajectory " + std::to_string(m) +
                               " failed to integrate to T");
      }
      states = std::move(tr.states);
    }
    if (options.gl) {
      Matrix& g = d.gl_states[static_cast<std::size_t>(m)];
      g.resize(gamma_count, dim);
      for (int k = 0; k < gamma_count; ++k) {
        g.row(k) = states.row(index_of(d.gl_times[static_cast<std::size_t>(k)]));
      }
    }
    if (options.uniform) {
      Matrix& u = d.uniform_states[static_cast<std::size_t>(m)];
      u.resize(gamma_count + 1, dim);
      for (int k = 0; k <= gamma_count; ++k) {
        u.row(k) = states.row(index_of(d.uniform_times[static_cast<std::size_t>(k)]));
      }
      u.row(0) = x0.transpose();
    }
    d.endpoint.row(m) = states.row(index_of(T));
  });
  d.validate();
  return d;
}

SnapshotDataset dataset_from_trajectories(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) throw InvalidArgument("dataset_from_trajectories: no trajectories");
  const Trajectory& first = trajectories.front();
  const std::size_t n = first.times.size();
  if (n < 2 || first.times[0] != 0.0) {
    throw InvalidArgument("dataset_from_trajectories: times must start at 0 with >= 2 samples");
  }
  const int gamma = static_cast<int>(n) - 1;
  const double T = first.times.back();
  const double h = T / gamma;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(first.times[k] - h * static_cast<double>(k)) > 1e-9 * std::max(1.0, T)) {
      throw InvalidArgument("dataset_from_trajectories: times are not equally spaced");
    }
  }
  SnapshotDataset d;
  d.dim = first.dim();
  d.T = T;
  d.gamma_count = gamma;
  d.uniform_times = first.times;
  const auto M = static_cast<Eigen::Index>(trajectories.size());
  d.initial.resize(M, d.dim);
  d.endpoint.resize(M, d.dim);
  for (Eigen::Index m = 0; m < M; ++m) {
    const Trajectory& tr = trajectories[static_cast<std::size_t>(m)];
    if (tr.times.size() != n || tr.dim() != d.dim) {
      throw InvalidArgument("dataset_from_trajectories: trajectory " + std::to_string(m) +
                            " has a different shape");
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(tr.times[k] - first.times[k]) > 1e-12 * std::max(1.0, T)) {
        throw InvalidArgument("dataset_from_trajectories: trajectory " + std::to_string(m) +
                              " uses a different time grid");
      }
    }
    d.uniform_states.push_back(tr.states);
    d.initial.row(m) = tr.states.row(0);
    d.endpoint.row(m) = tr.states.row(static_cast<Eigen::Index>(n - 1));
    d.status.push_back(tr.status);
  }
  d.validate();
  return d;
}

SnapshotDataset subset(const SnapshotDataset& data, std::span<const int> rows) {
  SnapshotDataset d;
  d.dim = data.dim;
  d.T = data.T;
  d.gamma_count = data.gamma_count;
  d.gl_times = data.gl_times;
  d.uniform_times = data.uniform_times;
  const auto M = static_cast<Eigen::Index>(rows.size());
  d.initial.resize(M, data.dim);
  d.endpoint.resize(M, data.dim);
  for (Eigen::Index i = 0; i < M; ++i) {
    const int r = rows[static_cast<std::size_t>(i)];
    if (r < 0 || r >= data.size()) throw InvalidArgument("subset: row out of range");
    d.initial.row(i) = data.initial.row(r);
    d.endpoint.row(i) = data.endpoint.row(r);
    if (data.has_gl()) d.gl_states.push_back(data.gl_states[static_cast<std::size_t>(r)]);
    if (data.has_uniform()) d.uniform_states.push_back(data.uniform_states[static_cast<std::size_t>(r)]);
    if (!data.status.empty()) d.status.push_back(data.status[static_cast<std::size_t>(r)]);
  }
  return d;
}

}  // namespace koopgen

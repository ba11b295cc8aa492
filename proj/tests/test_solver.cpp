#include <doctest.h>

#include <cmath>
#include <random>

#include "hotspot/solver.hpp"

using namespace hotspot;

namespace {

Matrix random_basis(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 0.5);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

ProblemData single_cell(double y, double pop) {
  Tensor3 counts(Dims{1, 1, 1});
  counts(0, 0, 0) = y;
  Tensor3 population(Dims{1, 1, 1});
  population(0, 0, 0) = pop;
  auto basis = std::make_shared<const BasisSet>(
      make_basis_set({1, 1, 1}, Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                     Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1)));
  return ProblemData(CountTensor(std::move(counts)), std::move(population), std::move(basis));
}

/// Poisson-like data on a smooth basis with identity hot-spot bases.
ProblemData spline_instance(Dims d, std::mt19937_64& rng, double rate = 0.5,
                            double hot_rate = 0.0, int hot_cells = 0) {
  auto basis = std::make_shared<const BasisSet>(default_basis_set(d));
  Tensor3 counts(d);
  Tensor3 population(d);
  std::uniform_real_distribution<double> pop_dist(20.0, 60.0);
  std::vector<long> cells(d.size());
  for (long i = 0; i < d.size(); ++i) cells[i] = i;
  std::shuffle(cells.begin(), cells.end(), rng);
  std::vector<bool> hot(d.size(), false);
  for (int c = 0; c < hot_cells; ++c) hot[cells[c]] = true;
  for (long i = 0; i < d.size(); ++i) {
    population.values()[i] = pop_dist(rng);
    const double mean = population.values()[i] * (hot[i] ? rate + hot_rate : rate);
    std::poisson_distribution<long> poisson(mean);
    counts.values()[i] = static_cast<double>(poisson(rng));
  }
  return ProblemData(CountTensor(std::move(counts)), std::move(population), std::move(basis));
}

/// Independent damped Newton on theta_m alone, built from dense algebra.
Vector glm_oracle(const ProblemData& data, int iters = 200) {
  const Matrix x = Matrix(data.basis().x);
  Vector theta = Vector::Zero(x.cols());
  auto nll = [&](const Vector& th) {
    const Vector eta = x * th;
    return (-data.y_vec().array() * eta.array() +
            data.pop_vec().array() * eta.array().exp())
        .sum();
  };
  for (int it = 0; it < iters; ++it) {
    const Vector eta = x * theta;
    const Vector gamma = data.pop_vec().array() * eta.array().exp();
    const Vector grad = x.transpose() * (gamma - data.y_vec());
    const Matrix hess = x.transpose() * gamma.asDiagonal() * x;
    const Vector dir = hess.ldlt().solve(grad);
    double step = 1.0;
    const double f0 = nll(theta);
    while (step > 1e-12 && nll(theta - step * dir) > f0) step *= 0.5;
    theta -= step * dir;
    if (dir.lpNorm<Eigen::Infinity>() * step < 1e-12) break;
  }
  return theta;
}

}  // namespace

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 10; ++i) {
    const double x = normal(rng);
    CHECK(soft_threshold(x, 0.0) == x);
  }
  CHECK_THROWS_AS(soft_threshold(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("IRLS on a scalar instance performs the hand-computed Newton step") {
  // pop=1, y=2, theta=0: theta' = theta + (y - e^theta)/e^theta = 1.
  ProblemData data = single_cell(2.0, 1.0);
  SolverConfig config;
  config.ridge = 1e-12;
  const IrlsStepResult step = irls_step(data, ModelParams::zeros(data.basis()), config);
  CHECK(step.theta_m[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(step.stagnated);
}

TEST_CASE("IRLS leaves the GLM optimum fixed") {
  std::mt19937_64 rng(3);
  ProblemData data = spline_instance({4, 3, 6}, rng);
  SolverConfig config;
  config.ridge = 1e-12;
  config.outer_tol = 1e-12;
  config.max_outer = 200;
  const Vector optimum = fit_glm_theta_m(data, config);
  const IrlsStepResult step =
      irls_step(data, ModelParams{optimum, Vector::Zero(data.basis().q())}, config);
  CHECK((step.theta_m - optimum).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("undamped IRLS step equals a dense Newton step") {
  std::mt19937_64 rng(5);
  ProblemData data = spline_instance({2, 2, 2}, rng);
  ModelParams params = ModelParams::zeros(data.basis());
  params.theta_m.setConstant(0.1);

  SolverConfig config;
  config.ridge = 1e-12;
  const IrlsStepResult step = irls_step(data, params, config);

  const Matrix x = Matrix(data.basis().x);
  const Vector eta = x * params.theta_m;
  const Vector gamma = data.pop_vec().array() * eta.array().exp();
  const Matrix hess = x.transpose() * gamma.asDiagonal() * x;
  const Vector grad = x.transpose() * (gamma - data.y_vec());
  const Vector newton = params.theta_m - hess.ldlt().solve(grad);
  CHECK((step.theta_m - newton).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("Lipschitz constant") {
  ProblemData cell = single_cell(1.0, 1.0);
  CHECK(lipschitz_constant(cell, ModelParams::zeros(cell.basis())) == doctest::Approx(1.0));

  std::mt19937_64 rng(7);
  ProblemData data = spline_instance({3, 2, 5}, rng);
  const ModelParams params = ModelParams::zeros(data.basis());
  const Vector w = poisson_means(data, linear_predictor(data, params));
  CHECK(lipschitz_constant(data, params) == doctest::Approx(w.maxCoeff()));

  // Non-identity Z: compare against a power-iteration oracle.
  auto basis = std::make_shared<const BasisSet>(make_basis_set(
      {3, 2, 2}, random_basis(3, 2, rng), random_basis(2, 2, rng), random_basis(2, 1, rng),
      random_basis(3, 2, rng), random_basis(2, 2, rng), random_basis(2, 2, rng)));
  Tensor3 counts(Dims{3, 2, 2});
  Tensor3 population(Dims{3, 2, 2});
  for (auto& v : population.values()) v = 2.0;
  ProblemData zdata(CountTensor(std::move(counts)), std::move(population), std::move(basis));
  const ModelParams zparams = ModelParams::zeros(zdata.basis());
  const Vector wz = poisson_means(zdata, linear_predictor(zdata, zparams));
  const Matrix ztwz =
      Matrix(zdata.basis().z).transpose() * wz.asDiagonal() * Matrix(zdata.basis().z);
  Vector v = Vector::Ones(ztwz.cols()).normalized();
  double eig = 0.0;
  for (int it = 0; it < 500; ++it) {
    v = (ztwz * v).normalized();
    eig = v.dot(ztwz * v);
  }
  CHECK(lipschitz_constant(zdata, zparams) == doctest::Approx(eig).epsilon(1e-6));
}

TEST_CASE("FISTA momentum recursion") {
  CHECK(fista_momentum_next(1.0) == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0));
}

TEST_CASE("FISTA returns exactly zero above the gradient norm") {
  std::mt19937_64 rng(11);
  ProblemData data = spline_instance({3, 2, 4}, rng);
  const Vector theta_m = fit_glm_theta_m(data);
  const ModelParams at_zero{theta_m, Vector::Zero(data.basis().q())};
  const double bound = grad_theta_h(data, at_zero).lpNorm<Eigen::Infinity>();

  SolverConfig config;
  const FistaResult result =
      fista_solve(data, theta_m, Vector::Zero(data.basis().q()), bound * 1.01, config);
  CHECK(result.theta_h.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("FISTA solves the saturated single cell at lambda zero") {
  ProblemData data = single_cell(3.0, 2.0);
  SolverConfig config;
  config.max_inner = 1000;
  config.inner_tol = 1e-12;
  const FistaResult result =
      fista_solve(data, Vector::Zero(1), Vector::Zero(1), 0.0, config);
  CHECK(result.theta_h[0] == doctest::Approx(std::log(3.0 / 2.0)).epsilon(1e-6));
}

TEST_CASE("FISTA output satisfies the soft-threshold fixed point") {
  std::mt19937_64 rng(13);
  ProblemData data = spline_instance({4, 3, 6}, rng, 0.5, 1.0, 5);
  const Vector theta_m = fit_glm_theta_m(data);
  const ModelParams at_zero{theta_m, Vector::Zero(data.basis().q())};
  const double lambda = 0.3 * grad_theta_h(data, at_zero).lpNorm<Eigen::Infinity>();

  SolverConfig config;
  config.max_inner = 2000;
  config.inner_tol = 1e-12;
  const FistaResult result =
      fista_solve(data, theta_m, Vector::Zero(data.basis().q()), lambda, config);
  CHECK(result.converged);

  const ModelParams at{theta_m, result.theta_h};
  const double l = lipschitz_constant(data, at);
  const Vector grad = grad_theta_h(data, at);
  const Vector fixed = soft_threshold(Vector(result.theta_h - grad / l), lambda / l);
  CHECK((result.theta_h - fixed).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("fit with a huge penalty matches an independent GLM oracle") {
  std::mt19937_64 rng(17);
  ProblemData data = spline_instance({4, 3, 6}, rng);
  SolverConfig config;
  config.outer_tol = 1e-12;
  config.max_outer = 300;
  const ModelFit result = fit(data, 1e12, config);
  CHECK(result.params.theta_h.lpNorm<Eigen::Infinity>() == 0.0);
  const Vector oracle = glm_oracle(data);
  CHECK((result.params.theta_m - oracle).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("fit survives all-zero counts") {
  Tensor3 counts(Dims{2, 2, 3});
  Tensor3 population(Dims{2, 2, 3});
  for (auto& v : population.values()) v = 5.0;
  auto basis = std::make_shared<const BasisSet>(default_basis_set({2, 2, 3}));
  ProblemData data(CountTensor(std::move(counts)), std::move(population), std::move(basis));
  const ModelFit result = fit(data, 1.0);
  CHECK(std::isfinite(result.objective_value));
  // All rates driven to the clamp floor: objective ~ sum(pop) * e^-30.
  CHECK(result.objective_value < 1.0);
  CHECK(result.objective_value >= 0.0);
}

TEST_CASE("objective trace is nonincreasing") {
  std::mt19937_64 rng(19);
  for (double lambda : {0.1, 2.0, 50.0}) {
    ProblemData data = spline_instance({4, 3, 6}, rng, 0.5, 0.8, 6);
    const ModelFit result = fit(data, lambda);
    for (size_t i = 1; i < result.objective_trace.size(); ++i)
      CHECK(result.objective_trace[i] <= result.objective_trace[i - 1] + 1e-8);
  }
}

TEST_CASE("fit is deterministic") {
  std::mt19937_64 rng(23);
  ProblemData data = spline_instance({3, 2, 5}, rng, 0.5, 1.0, 3);
  const ModelFit a = fit(data, 0.7);
  const ModelFit b = fit(data, 0.7);
  CHECK(a.params.theta_m == b.params.theta_m);
  CHECK(a.params.theta_h == b.params.theta_h);
  CHECK(a.objective_value == b.objective_value);
}

TEST_CASE("population rescaling is absorbed by the smooth offset") {
  std::mt19937_64 rng(29);
  ProblemData data = spline_instance({3, 2, 5}, rng, 0.5, 0.0, 0);
  SolverConfig config;
  config.outer_tol = 1e-13;
  config.inner_tol = 1e-13;
  config.max_outer = 500;
  config.max_inner = 2000;

  Tensor3 scaled_pop = data.population();
  for (auto& v : scaled_pop.values()) v *= 7.0;
  ProblemData scaled(data.counts(), std::move(scaled_pop), data.basis_ptr());

  SUBCASE("independent fits agree in the unpenalized-hot-spot regime") {
    const double lambda = 2.0 * lambda_max(data);
    const ModelFit base = fit(data, lambda, config);
    const ModelFit rescaled = fit(scaled, lambda, config);
    for (long i = 0; i < data.n(); ++i)
      CHECK(rescaled.mu_hat_counts.values()[i] ==
            doctest::Approx(base.mu_hat_counts.values()[i]).epsilon(1e-6));
  }

  SUBCASE("the shifted solution is a fixed point of the scaled problem") {
    // Spline rows sum to one, so the all-ones coefficient vector is the
    // constant column: theta_m - log(c) * 1 absorbs a population scaling
    // by c exactly.
    const ModelFit base = fit(data, 0.5, config);
    ModelParams shifted = base.params;
    shifted.theta_m.array() -= std::log(7.0);
    const ModelFit rescaled = fit(scaled, 0.5, config, shifted);
    for (long i = 0; i < data.n(); ++i)
      CHECK(rescaled.mu_hat_counts.values()[i] ==
            doctest::Approx(base.mu_hat_counts.values()[i]).epsilon(1e-6));
  }
}

TEST_CASE("lambda path") {
  std::mt19937_64 rng(31);
  ProblemData data = spline_instance({4, 3, 6}, rng, 0.5, 1.2, 6);

  SUBCASE("singleton grid equals a direct fit") {
    const FitPath path = fit_path(data, {0.9});
    REQUIRE(path.at(0) != nullptr);
    const ModelFit direct = fit(data, 0.9);
    CHECK(path.at(0)->objective_value == doctest::Approx(direct.objective_value));
  }

  SUBCASE("grid headed by lambda_max starts fully sparse") {
    const double lmax = lambda_max(data);
    const FitPath path = fit_path(data, make_lambda_grid(lmax, 5));
    REQUIRE(path.at(0) != nullptr);
    CHECK(path.at(0)->params.theta_h.lpNorm<Eigen::Infinity>() == 0.0);
  }

  SUBCASE("nonzero count grows as lambda decreases") {
    const double lmax = lambda_max(data);
    const FitPath path = fit_path(data, make_lambda_grid(lmax, 6));
    long prev = 0;
    for (size_t i = 0; i < path.lambdas.size(); ++i) {
      REQUIRE(path.at(i) != nullptr);
      long nnz = 0;
      for (long j = 0; j < path.at(i)->params.theta_h.size(); ++j)
        nnz += path.at(i)->params.theta_h[j] != 0.0;
      CHECK(nnz >= prev);
      prev = nnz;
    }
  }

  SUBCASE("grid validation") {
    CHECK_THROWS_AS(fit_path(data, {}), std::invalid_argument);
    CHECK_THROWS_AS(fit_path(data, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_path(data, {1.0, -0.5}), std::invalid_argument);
  }

  SUBCASE("cold starts in parallel agree with a direct fit") {
    SolverConfig cold;
    cold.warm_start = false;
    const FitPath path = fit_path(data, {2.0, 0.5}, cold);
    REQUIRE(path.at(0) != nullptr);
    REQUIRE(path.at(1) != nullptr);
    const ModelFit direct = fit(data, 0.5, cold);
    CHECK(path.at(1)->params.theta_h == direct.params.theta_h);
  }
}

TEST_CASE("lambda_max") {
  SUBCASE("flat representable data gives a vanishing lambda_max") {
    // y exactly equals pop * 0.2 everywhere; the spline span contains
    // constants, so the GLM fit is exact and the gradient vanishes.
    Tensor3 counts(Dims{3, 2, 5});
    Tensor3 population(Dims{3, 2, 5});
    for (long i = 0; i < population.size(); ++i) {
      population.values()[i] = 10.0;
      counts.values()[i] = 2.0;
    }
    auto basis = std::make_shared<const BasisSet>(default_basis_set({3, 2, 5}));
    ProblemData data(CountTensor(std::move(counts)), std::move(population), std::move(basis));
    CHECK(lambda_max(data) < 1e-4);
  }

  SUBCASE("a planted hot-spot raises lambda_max") {
    std::mt19937_64 rng_a(37), rng_b(37);
    ProblemData calm = spline_instance({4, 3, 6}, rng_a, 0.5, 0.0, 0);
    ProblemData spiked = spline_instance({4, 3, 6}, rng_b, 0.5, 3.0, 8);
    CHECK(lambda_max(spiked) > lambda_max(calm));
  }

  SUBCASE("self-consistency with FISTA") {
    std::mt19937_64 rng(41);
    ProblemData data = spline_instance({4, 3, 6}, rng, 0.5, 1.0, 5);
    const double lmax = lambda_max(data);
    const Vector theta_m = fit_glm_theta_m(data);
    const FistaResult result =
        fista_solve(data, theta_m, Vector::Zero(data.basis().q()), lmax * 1.01, {});
    CHECK(result.theta_h.lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("lambda grid construction") {
  const auto grid = make_lambda_grid(8.0, 10, 1e-3);
  CHECK(grid.size() == 10);
  CHECK(grid.front() == doctest::Approx(8.0));
  CHECK(grid.back() == doctest::Approx(8.0e-3));
  for (size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] < grid[i - 1]);
  CHECK(make_lambda_grid(5.0, 1).size() == 1);
}

TEST_CASE("hot-spot tensor sparsity is monotone along the path") {
  std::mt19937_64 rng(43);
  ProblemData data = spline_instance({4, 3, 6}, rng, 0.5, 1.0, 6);
  const FitPath path = fit_path(data, make_lambda_grid(lambda_max(data), 5));
  long prev_nonzeros = 0;
  for (size_t i = 0; i < path.fits.size(); ++i) {
    REQUIRE(path.at(i) != nullptr);
    long nnz = 0;
    for (double v : path.at(i)->h_hat.values()) nnz += v != 0.0;
    CHECK(nnz >= prev_nonzeros);
    prev_nonzeros = nnz;
  }
}

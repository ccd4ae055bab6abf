#pragma once

#include "gpdc/gp.hpp"
#include "gpdc/random.hpp"

#include <vector>

namespace gpdc {

/// Probability of improvement Φ((μ − incumbent − ξ)/σ); for σ = 0 the indicator μ > incumbent + ξ.
double acq_pi(double mu, double sigma, double incumbent, double xi = 1e-3);

/// Expected improvement (μ − incumbent)Φ(z) + σφ(z), z = (μ − incumbent)/σ; max(μ − incumbent, 0)
/// for σ = 0.
double acq_ei(double mu, double sigma, double incumbent);

/// τ_t = 2 log(t^{d/2+2} π² / (3δ)).
double ucb_tau(int t, int dim, double delta = 0.05);
/// μ + √(ν τ_t) σ.
double acq_ucb(double mu, double sigma, int t, int dim, double nu = 1.0, double delta = 0.05);

/// μ + √(log(2/δ)) (√(σ² + γ̂) − √γ̂).
double acq_gpmi(double mu, double sigma, double gamma_hat, double delta = 1e-10);

/// Mean over sampled maxima y*_k of γφ(γ)/(2Φ(γ)) − log Φ(γ), γ = (y*_k − μ)/σ. Returns 0 for σ ≤ 0.
double acq_mes(double mu, double sigma, std::span<const double> max_samples);

/// Samples of the posterior maximum over the grid from a Gumbel fitted to
/// F(y) = Π_n Φ((y − μ_n)/σ_n) at its quartiles. Every sample is at least max_n μ_n.
/// Throws NumericalFailure if the quartile bisection does not converge.
std::vector<double> gumbel_max_samples(const Posterior& post, int count, Rng& rng);
std::vector<double> gumbel_max_samples(const Vec& mean, const Vec& stddev, int count, Rng& rng);

}  // namespace gpdc

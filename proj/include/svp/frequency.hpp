#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svp/geometry.hpp"

namespace svp {

enum class FrequencyKind { first, second, third };

std::string to_string(FrequencyKind kind);

struct FrequencySettings {
  double tol = 1e-12;        // relative quotient decrease that stops the descent
  int max_iterations = 20000;
  int restarts = 3;          // perturbed restarts for p != 2
  std::uint64_t seed = 1;
};

struct FrequencyResult {
  FrequencyKind kind = FrequencyKind::first;
  double value = 0.0;
  std::vector<double> u;               // nodal minimizer, unit denominator
  std::optional<double> c3;            // second kind only
  std::vector<std::size_t> pinned;     // Dirichlet set used
  double residual = 0.0;               // relative Euler-Lagrange residual
  int iterations = 0;
  bool degenerate = false;
  std::string flag;
};

/// argmin over C of sum w_i |u_i - C|^p by golden section on [min u, max u].
double optimal_constant(std::span<const double> u, std::span<const double> w, double p);

/// Nodes on the non-periodic ends of every axis.
std::vector<std::size_t> boundary_nodes(const Mesh& mesh);

/// Quotient int |grad u|^p / int |u - C|^p with C = 0 (first, third) or the
/// optimal constant (second). The constant used is written to c_out.
double rayleigh_quotient(const Mesh& mesh, double p, FrequencyKind kind, std::span<const double> u,
                         double* c_out = nullptr);

/// Minimizes the quotient over nodal u vanishing on `pinned` (ignored for the
/// second kind).
FrequencyResult minimize_quotient(const Mesh& mesh, double p, FrequencyKind kind,
                                  std::vector<std::size_t> pinned, const FrequencySettings& settings = {});

FrequencyResult first_frequency(const SectionDescriptor& section, double p,
                                const FrequencySettings& settings = {});
FrequencyResult second_frequency(const SectionDescriptor& section, double p,
                                 const FrequencySettings& settings = {});
FrequencyResult third_frequency(const SectionDescriptor& section, double p,
                                std::vector<std::size_t> pinned, const FrequencySettings& settings = {});
/// Third frequency with the section's own Dirichlet trace.
FrequencyResult third_frequency(const SectionDescriptor& section, double p,
                                const FrequencySettings& settings = {});

struct FrequencyStation {
  double tau = 0.0;
  FrequencyResult result;
};

std::vector<FrequencyStation> frequency_profile(const Mesh& mesh, double p, FrequencyKind kind,
                                                std::span<const double> stations,
                                                const FrequencySettings& settings = {});

}  // namespace svp

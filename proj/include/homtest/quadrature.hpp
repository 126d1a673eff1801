#pragma once

#include <functional>
#include <vector>

namespace homtest {

struct QuadratureRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre nodes and weights by Newton iteration on the Legendre
// polynomial; accurate to machine precision for n up to several hundred.
QuadratureRule gauss_legendre(int n);

// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int n = 64);

// Average of f(theta) over one full phase period [0, 2*pi); used for the
// phase-randomized expectation values. Panelized Gauss-Legendre.
double phase_average(const std::function<double(double)>& f, int n = 96);

}  // namespace homtest

#pragma once

namespace svk {

struct MLParams {
  double beta = 1, gamma = 1;
};

struct MLResult {
  double value = 0;
  int terms = 0;
  // magnitudes were decreasing when the stopping rule fired
  bool decreasing_at_stop = false;
};

// E_{beta,gamma}(z) = sum_k z^k / Gamma(beta k + gamma), plain power series for |z| <= 50.
// Stops once three consecutive terms fall below 1e-16 |partial sum|.
MLResult ml_detail(MLParams p, double z);
double ml(MLParams p, double z);

// E_alpha(z) = E_{alpha,1}(z)
double e_alpha(double alpha, double z);

// f(t) = t^{alpha-1} E_{alpha,alpha}(mu t^alpha)
double f_profile(double alpha, double mu, double t);
// int_0^u f(r) dr = u^alpha E_{alpha,alpha+1}(mu u^alpha)
double f_integral(double alpha, double mu, double u);
// average of f over [(lag - 1/2) h, (lag + 1/2) h]
double f_cell_average(double alpha, double mu, double h, int lag);

}  // namespace svk

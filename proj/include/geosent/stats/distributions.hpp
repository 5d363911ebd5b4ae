#pragma once

namespace geosent::stats {

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
// Regularized upper incomplete gamma Q(a, x).
double incomplete_gamma_q(double a, double x);

// Upper-tail probabilities P(X > x).
double student_t_sf(double t, double df);
double student_t_two_sided(double t, double df);
double chi2_sf(double x, double df = 1.0);
double f_sf(double f, double df1, double df2);
double normal_sf(double z);

}  // namespace geosent::stats

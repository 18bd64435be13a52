#pragma once

#include <cstddef>

namespace lml {

double log_beta(double a, double b);

// Regularized incomplete beta I_x(a,b) via the Lentz continued fraction,
// with the usual symmetry switch at x > (a+1)/(a+b+2).
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p-value P(|T_df| >= |t|) for the Student t distribution,
// I_x(df/2, 1/2) with x = df/(df + t^2). df may be fractional (Welch).
double student_t_two_sided_p(double t, double df);

}  // namespace lml

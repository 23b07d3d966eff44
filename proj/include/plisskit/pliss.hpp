#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace plisskit::pliss {

// Indices k (0-based) such that every forward average from k stays at or
// below alpha3:
//   { k : for all m with k < m <= len,  (S_m - S_k)/(m - k) <= alpha3 }
// with S the prefix sums of seq. O(n) backward scan on b_k = S_k - alpha3*k:
// k qualifies iff b_k >= max_{k < m <= len} b_m. Ties are inclusive.
// Throws EmptySequence for an empty input.
std::vector<std::size_t> pliss_times(std::span<const double> seq, double alpha3);

// O(n^2) all-pairs reference used to cross-check pliss_times.
std::vector<std::size_t> pliss_oracle(std::span<const double> seq, double alpha3);

// Guaranteed density (alpha3 - alpha2)/(alpha3 - alpha1) of Pliss times for
// sequences bounded below by alpha1 with mean at most alpha2.
// Throws BadOrdering unless alpha1 < alpha2 < alpha3.
double density_bound(double alpha1, double alpha2, double alpha3);

}  // namespace plisskit::pliss

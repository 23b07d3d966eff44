#include "plisskit/pliss.hpp"

#include <algorithm>

#include "plisskit/errors.hpp"

namespace plisskit::pliss {

std::vector<std::size_t> pliss_times(std::span<const double> seq, double alpha3) {
    if (seq.empty()) throw EmptySequence("pliss_times: empty sequence");
    const std::size_t n = seq.size();

    // b_k = S_k - alpha3*k evolves by b_{k+1} = b_k + (a_k - alpha3); k is a
    // Pliss time iff b_k >= b_m for all m in (k, n]. Scan from the right
    // keeping the running max of b.
    std::vector<std::size_t> out;
    std::vector<double> b(n + 1);
    b[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) b[k + 1] = b[k] + (seq[k] - alpha3);

    double max_tail = b[n];
    for (std::size_t k = n; k-- > 0;) {
        if (b[k] >= max_tail) out.push_back(k);
        max_tail = std::max(max_tail, b[k]);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> pliss_oracle(std::span<const double> seq, double alpha3) {
    if (seq.empty()) throw EmptySequence("pliss_oracle: empty sequence");
    const std::size_t n = seq.size();
    std::vector<double> S(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) S[k + 1] = S[k] + seq[k];

    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n; ++k) {
        bool ok = true;
        for (std::size_t m = k + 1; m <= n && ok; ++m)
            ok = (S[m] - S[k]) <= alpha3 * static_cast<double>(m - k);
        if (ok) out.push_back(k);
    }
    return out;
}

double density_bound(double alpha1, double alpha2, double alpha3) {
    if (!(alpha1 < alpha2 && alpha2 < alpha3))
        throw BadOrdering("density_bound requires alpha1 < alpha2 < alpha3");
    return (alpha3 - alpha2) / (alpha3 - alpha1);
}

}  // namespace plisskit::pliss

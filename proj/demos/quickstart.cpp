// Recover a planted (s, sigma)-sparse signal from hierarchical measurements
// with a Gaussian channel matrix and subsampled DFT blocks.

#include <iostream>

#include "hisparse/hisparse.hpp"

int main() {
    using namespace hisparse;

    const Index M = 12, N = 16, m = 16, n = 32;
    const auto structure = BlockStructure::uniform(N, n);
    const auto k = HiSparsity::uniform(2, N, 3);

    const auto H = gaussian_dft_operator(M, m, structure, /*seed=*/42);
    const auto x = generate_signal(structure, k, /*seed=*/7);
    const Vector y = add_noise(H.apply(x), /*snr_db=*/20.0, /*seed=*/9);

    const auto result = hihtp(H, y, k);
    std::cout << "iterations:     " << result.iterations << " (" << to_string(result.stop_reason) << ")\n"
              << "relative error: " << (x.coeffs() - result.estimate.coeffs()).norm() / x.norm() << "\n"
              << "active blocks:  ";
    for (Index i : result.support.active_blocks()) std::cout << i << ' ';
    std::cout << "\ntrue blocks:    ";
    for (Index i : active_blocks(x)) std::cout << i << ' ';
    std::cout << "\n";
}

#ifndef DERMBENCH_SPECTRAL_HPP
#define DERMBENCH_SPECTRAL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "dermbench/matrix.hpp"

namespace dermbench::spectral {

// Disjoint frequency-index groups of a d x d spectrum. Masks are {0,1}
// matrices; together they tile the spectrum (sum = all-ones, pairwise
// product = zero) and each mask is invariant under frequency-index negation
// modulo d, so masked spectra of real matrices stay conjugate-symmetric.
struct FrequencyPartition {
    std::size_t d = 0;
    std::size_t k_groups = 0;
    std::vector<RealMatrix> masks;

    void validate() const; // throws on any broken invariant
};

enum class BankMode { frequency_disjoint, free_spatial };

// K spatial basis matrices plus, in frequency-disjoint mode, the partition
// and the learnable spectrum they were cut from.
struct BasisBank {
    BankMode mode = BankMode::free_spatial;
    std::vector<RealMatrix> bases; // K matrices, d_out x d_in
    std::optional<FrequencyPartition> partition;
    std::optional<ComplexMatrix> spectrum_params;

    std::size_t k() const noexcept { return bases.size(); }
    std::size_t d_out() const { return bases.empty() ? 0 : bases.front().rows(); }
    std::size_t d_in() const { return bases.empty() ? 0 : bases.front().cols(); }
};

// Unnormalized forward 2D DFT; bin (0,0) is the plain sum of all entries.
ComplexMatrix dft2(const RealMatrix& m);
ComplexMatrix dft2(const ComplexMatrix& m);

// Inverse 2D DFT carrying the full 1/(d*d) factor, so dft2(idft2(S)) == S.
ComplexMatrix idft2(const ComplexMatrix& m);

// Strips imaginary parts, failing if any |imag| exceeds tol. A failure here
// usually means a mask broke Hermitian symmetry.
RealMatrix real_part_checked(const ComplexMatrix& m, double tol);

// Signed centered frequency for index u on a side-d axis (DC -> 0, Nyquist
// for even d -> +d/2; its negation aliases onto itself).
long centered_frequency(std::size_t u, std::size_t d);

// Number of distinct centered radial distances for side d; the capacity
// limit on k in build_radial_partition.
std::size_t distinct_radius_count(std::size_t d);

// Concentric annuli in centered radial distance, equal-width with boundary
// ties to the inner band, then minimally adjusted (monotone in radius) so
// every band is non-empty. Throws a capacity error when k exceeds the number
// of distinct radii.
FrequencyPartition build_radial_partition(std::size_t d, std::size_t k);

// basis_k = Re(idft2(mask_k .* spectrum)); requires a conjugate-symmetric
// spectrum whose side matches the partition.
BasisBank construct_bases(const ComplexMatrix& spectrum, const FrequencyPartition& partition);

bool is_hermitian(const ComplexMatrix& s, double tol);

} // namespace dermbench::spectral

#endif

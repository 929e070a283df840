#include "dermbench/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace dermbench::spectral {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// One axis of the separable transform. sign = -1 forward, +1 inverse.
void dft_axis(ComplexMatrix& m, bool along_rows, int sign) {
    const std::size_t d = m.rows();
    std::vector<std::complex<double>> in(d), out(d);
    // Twiddle table keeps the direct O(d^2) axis pass cheap enough at desk scale.
    std::vector<std::complex<double>> tw(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double ang = sign * kTwoPi * static_cast<double>(j) / static_cast<double>(d);
        tw[j] = {std::cos(ang), std::sin(ang)};
    }
    for (std::size_t line = 0; line < d; ++line) {
        for (std::size_t j = 0; j < d; ++j)
            in[j] = along_rows ? m(line, j) : m(j, line);
        for (std::size_t f = 0; f < d; ++f) {
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t j = 0; j < d; ++j)
                acc += in[j] * tw[(f * j) % d];
            out[f] = acc;
        }
        for (std::size_t f = 0; f < d; ++f)
            (along_rows ? m(line, f) : m(f, line)) = out[f];
    }
}

void require_square(std::size_t rows, std::size_t cols, const char* op) {
    if (rows != cols || rows == 0)
        fail(ErrorCode::dimension_mismatch,
             std::string(op) + ": input must be square with side >= 1, got " +
                 std::to_string(rows) + "x" + std::to_string(cols));
}

} // namespace

ComplexMatrix dft2(const ComplexMatrix& m) {
    require_square(m.rows(), m.cols(), "dft2");
    ComplexMatrix s = m;
    dft_axis(s, true, -1);
    dft_axis(s, false, -1);
    return s;
}

ComplexMatrix dft2(const RealMatrix& m) {
    require_square(m.rows(), m.cols(), "dft2");
    ComplexMatrix c(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t cix = 0; cix < m.cols(); ++cix)
            c(r, cix) = {m(r, cix), 0.0};
    return dft2(c);
}

ComplexMatrix idft2(const ComplexMatrix& m) {
    require_square(m.rows(), m.cols(), "idft2");
    ComplexMatrix s = m;
    dft_axis(s, true, +1);
    dft_axis(s, false, +1);
    const double norm = 1.0 / (static_cast<double>(m.rows()) * static_cast<double>(m.cols()));
    for (auto& v : s.data()) v *= norm;
    return s;
}

RealMatrix real_part_checked(const ComplexMatrix& m, double tol) {
    if (!(tol > 0.0))
        fail(ErrorCode::invalid_argument, "real_part_checked: tol must be > 0");
    double worst = 0.0;
    for (const auto& v : m.data()) worst = std::max(worst, std::abs(v.imag()));
    if (worst > tol)
        fail(ErrorCode::non_real_result,
             "real_part_checked: imaginary residue " + std::to_string(worst) +
                 " exceeds tol " + std::to_string(tol));
    RealMatrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            out(r, c) = m(r, c).real();
    return out;
}

long centered_frequency(std::size_t u, std::size_t d) {
    const long lu = static_cast<long>(u), ld = static_cast<long>(d);
    return lu <= ld / 2 ? lu : lu - ld;
}

namespace {

std::vector<long> sorted_distinct_r2(std::size_t d) {
    std::vector<long> r2s;
    for (std::size_t u = 0; u < d; ++u) {
        for (std::size_t v = 0; v < d; ++v) {
            const long fu = centered_frequency(u, d), fv = centered_frequency(v, d);
            r2s.push_back(fu * fu + fv * fv);
        }
    }
    std::sort(r2s.begin(), r2s.end());
    r2s.erase(std::unique(r2s.begin(), r2s.end()), r2s.end());
    return r2s;
}

} // namespace

std::size_t distinct_radius_count(std::size_t d) {
    return sorted_distinct_r2(d).size();
}

FrequencyPartition build_radial_partition(std::size_t d, std::size_t k) {
    if (d < 1 || k < 1)
        fail(ErrorCode::invalid_argument, "build_radial_partition: need d >= 1 and k >= 1");
    const std::vector<long> r2s = sorted_distinct_r2(d);
    const std::size_t m = r2s.size();
    if (k > m)
        fail(ErrorCode::capacity,
             "build_radial_partition: k=" + std::to_string(k) + " exceeds the " +
                 std::to_string(m) + " distinct centered radial distances for d=" +
                 std::to_string(d));

    // Equal-width bands over radius r in [0, r_max]; r^2 and r_max^2 are
    // integers so the boundary test k^2 r^2 <= (j+1)^2 r_max^2 is exact and
    // boundary ties land in the inner band.
    const long r2max = r2s.back();
    std::vector<std::size_t> band(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = 0;
        while (static_cast<long long>(k) * k * r2s[i] >
               static_cast<long long>(j + 1) * (j + 1) * r2max)
            ++j;
        band[i] = std::min<std::size_t>(j, k - 1);
    }
    // Repair passes: forbid jumps, then force the tail bands to be reachable.
    // Keeps the map monotone in radius and makes every band non-empty.
    for (std::size_t i = 1; i < m; ++i)
        band[i] = std::min(band[i], band[i - 1] + 1);
    for (std::size_t i = 0; i < m; ++i) {
        const long need = static_cast<long>(k) - static_cast<long>(m - i);
        if (need > static_cast<long>(band[i])) band[i] = static_cast<std::size_t>(need);
    }

    std::map<long, std::size_t> band_of_r2;
    for (std::size_t i = 0; i < m; ++i) band_of_r2[r2s[i]] = band[i];

    FrequencyPartition part;
    part.d = d;
    part.k_groups = k;
    part.masks.assign(k, RealMatrix(d, d, 0.0));
    for (std::size_t u = 0; u < d; ++u) {
        for (std::size_t v = 0; v < d; ++v) {
            const long fu = centered_frequency(u, d), fv = centered_frequency(v, d);
            part.masks[band_of_r2[fu * fu + fv * fv]](u, v) = 1.0;
        }
    }
    part.validate();
    return part;
}

void FrequencyPartition::validate() const {
    if (masks.size() != k_groups || k_groups == 0)
        fail(ErrorCode::validation, "FrequencyPartition: mask count != k_groups");
    for (const auto& mask : masks) {
        if (mask.rows() != d || mask.cols() != d)
            fail(ErrorCode::validation, "FrequencyPartition: mask shape != d x d");
        for (double v : mask.data())
            if (v != 0.0 && v != 1.0)
                fail(ErrorCode::validation, "FrequencyPartition: mask entry not in {0,1}");
    }
    for (std::size_t u = 0; u < d; ++u) {
        for (std::size_t v = 0; v < d; ++v) {
            double sum = 0.0;
            for (const auto& mask : masks) sum += mask(u, v);
            if (sum != 1.0)
                fail(ErrorCode::validation,
                     "FrequencyPartition: bins must be covered exactly once");
        }
    }
    // Index-negation symmetry, bin (u,v) vs ((d-u)%d,(d-v)%d).
    for (const auto& mask : masks) {
        for (std::size_t u = 0; u < d; ++u)
            for (std::size_t v = 0; v < d; ++v)
                if (mask(u, v) != mask((d - u) % d, (d - v) % d))
                    fail(ErrorCode::validation,
                         "FrequencyPartition: mask not symmetric under index negation");
    }
    for (std::size_t g = 0; g < k_groups; ++g) {
        bool any = false;
        for (double v : masks[g].data()) any = any || v != 0.0;
        if (!any)
            fail(ErrorCode::validation,
                 "FrequencyPartition: group " + std::to_string(g) + " is empty");
    }
}

bool is_hermitian(const ComplexMatrix& s, double tol) {
    if (!s.square()) return false;
    const std::size_t d = s.rows();
    for (std::size_t u = 0; u < d; ++u) {
        for (std::size_t v = 0; v < d; ++v) {
            const auto a = s(u, v);
            const auto b = std::conj(s((d - u) % d, (d - v) % d));
            if (std::abs(a - b) > tol) return false;
        }
    }
    return true;
}

BasisBank construct_bases(const ComplexMatrix& spectrum, const FrequencyPartition& partition) {
    if (!spectrum.square() || spectrum.rows() != partition.d)
        fail(ErrorCode::dimension_mismatch,
             "construct_bases: spectrum side must match partition.d");
    // Tolerance scales with spectrum magnitude; the spectrum of a unit-scale
    // d x d matrix carries entries up to O(d^2).
    double mag = 0.0;
    for (const auto& v : spectrum.data()) mag = std::max(mag, std::abs(v));
    if (!is_hermitian(spectrum, 1e-9 * std::max(1.0, mag)))
        fail(ErrorCode::validation,
             "construct_bases: spectrum is not conjugate-symmetric (not the dft2 of a real matrix)");

    BasisBank bank;
    bank.mode = BankMode::frequency_disjoint;
    bank.partition = partition;
    bank.spectrum_params = spectrum;
    bank.bases.reserve(partition.k_groups);
    for (const auto& mask : partition.masks) {
        ComplexMatrix masked(partition.d, partition.d);
        for (std::size_t u = 0; u < partition.d; ++u)
            for (std::size_t v = 0; v < partition.d; ++v)
                masked(u, v) = mask(u, v) != 0.0 ? spectrum(u, v) : std::complex<double>{0.0, 0.0};
        bank.bases.push_back(real_part_checked(idft2(masked), 1e-9));
    }
    return bank;
}

} // namespace dermbench::spectral

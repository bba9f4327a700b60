#pragma once

namespace qraman {

// Defined physical constants, meV*ps. 4.31 meV / kPlanck = 1.0422 THz.
inline constexpr double kHbar = 0.6582119569;
inline constexpr double kPlanck = 4.135667696;

// FWHM -> sigma for a Gaussian: 2*sqrt(2*ln 2)
inline constexpr double kFwhmToSigma = 2.3548200450309493;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace qraman

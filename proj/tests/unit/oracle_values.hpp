#pragma once

#include <array>

// Exact t1 values from tests/oracles/t1_bruteforce.py, indexed as kAllTargets.
namespace t1 {

inline constexpr double kMeanA = 0.5;

// p(w, a, z, m), flat in Cards::cell order.
inline constexpr std::array<double, 16> kJoint{0.189, 0.081, 0.021, 0.009, 0.014, 0.006, 0.054, 0.126,
                                               0.126, 0.054, 0.006, 0.014, 0.009, 0.021, 0.081, 0.189};

inline constexpr std::array<double, 8> kMeanY{1.919, 1.919, 1.9118, 1.87724, 1.87724, 1.8926, 1.8998, 1.919};
inline constexpr std::array<double, 8> kMeanAY{1.5779, 1.3379, 1.3343, 1.11542, 1.11542, 1.06742, 1.07102, 1.01102};

inline constexpr double kTheta = 0.56688;
inline constexpr double kP1 = 0.24;
inline constexpr double kP2 = 0.2016;
inline constexpr double kP3 = 0.05568;
inline constexpr double kP4 = 0.0696;
inline constexpr double kP23 = 0.0;
inline constexpr double kTauConf = 0.05152;

// Indexed as kAllAteMeans.
inline constexpr std::array<double, 8> kAteMeans{3.101, 2.101, 2.092, 1.18, 1.18, 0.98, 0.989, 0.739};
inline constexpr double kPsi = 2.362;
inline constexpr double kPsiP1 = 1.0;
inline constexpr double kPsiP2 = 0.912;
inline constexpr double kPsiP3 = 0.2;
inline constexpr double kPsiP4 = 0.25;

}  // namespace t1

#pragma once

// Published benchmark values the acceptance suite reproduces. Tables 1 and 2
// share the row layout (maturity, alpha, beta) with one column block per
// jump intensity (0.3 then 1.0); table 3 uses constant jumps at sigma = 0.2.

namespace reference {

struct BasketRow {
    double maturity;
    double alpha;
    double beta;
    double mc[2];      // Monte Carlo benchmark per intensity
    double mc_sd[2];   // its reported standard deviation
    double ae[2];      // asymptotic-expansion price
    double cv[2];      // closed-form control-variate price
};

// normal jumps, eta = -0.08, gamma = 0.35
inline constexpr BasketRow kTable1[] = {
    {1.0, 0.1, 1.0, {5.91, 11.86}, {0.03, 0.05}, {5.91, 11.83}, {6.14, 12.70}},
    {1.0, 0.2, 1.0, {8.14, 13.25}, {0.02, 0.06}, {8.13, 13.24}, {8.31, 13.85}},
    {1.0, 0.5, 1.0, {15.50, 18.89}, {0.04, 0.05}, {15.18, 18.60}, {15.52, 19.25}},
    {1.0, 0.1, 0.8, {4.64, 11.13}, {0.02, 0.03}, {4.64, 11.16}, {5.03, 12.43}},
    {1.0, 0.2, 0.8, {5.47, 11.60}, {0.02, 0.06}, {5.47, 11.58}, {5.74, 12.56}},
    {1.0, 0.5, 0.8, {8.11, 13.25}, {0.03, 0.04}, {8.11, 13.23}, {8.29, 13.84}},
    {1.0, 0.1, 0.5, {4.06, 10.96}, {0.02, 0.03}, {4.08, 10.98}, {4.81, 12.40}},
    {1.0, 0.2, 0.5, {4.24, 11.00}, {0.01, 0.02}, {4.25, 11.01}, {4.83, 12.41}},
    {1.0, 0.5, 0.5, {4.85, 11.24}, {0.01, 0.04}, {4.85, 11.26}, {5.19, 12.44}},
    {3.0, 0.1, 1.0, {12.18, 22.94}, {0.02, 0.11}, {12.16, 22.99}, {12.75, 24.36}},
    {3.0, 0.2, 1.0, {15.25, 24.49}, {0.03, 0.13}, {15.14, 24.45}, {15.65, 25.78}},
    {3.0, 0.5, 1.0, {27.23, 33.03}, {0.09, 0.14}, {25.64, 31.55}, {27.21, 34.02}},
    {3.0, 0.1, 0.8, {10.69, 22.45}, {0.02, 0.10}, {10.68, 22.51}, {11.65, 23.97}},
    {3.0, 0.2, 0.8, {11.64, 22.81}, {0.02, 0.10}, {11.62, 22.79}, {12.29, 24.19}},
    {3.0, 0.5, 0.8, {15.19, 24.51}, {0.03, 0.07}, {15.14, 24.48}, {15.62, 25.76}},
    {3.0, 0.1, 0.5, {10.16, 22.35}, {0.02, 0.04}, {10.16, 22.43}, {11.53, 23.90}},
    {3.0, 0.2, 0.5, {10.29, 22.43}, {0.02, 0.07}, {10.29, 22.44}, {11.55, 23.91}},
    {3.0, 0.5, 0.5, {10.92, 22.51}, {0.02, 0.10}, {10.91, 22.57}, {11.77, 24.01}},
};

// normal jumps, eta = -0.3, gamma = 0.35
inline constexpr BasketRow kTable2[] = {
    {1.0, 0.1, 1.0, {6.99, 15.23}, {0.02, 0.03}, {7.00, 15.28}, {8.40, 18.20}},
    {1.0, 0.2, 1.0, {8.84, 15.76}, {0.01, 0.05}, {8.84, 15.79}, {9.91, 18.62}},
    {1.0, 0.5, 1.0, {15.89, 20.24}, {0.02, 0.04}, {15.62, 20.02}, {16.51, 22.34}},
    {1.0, 0.1, 0.8, {6.45, 15.14}, {0.01, 0.03}, {6.45, 15.17}, {8.13, 18.09}},
    {1.0, 0.2, 0.8, {6.72, 15.20}, {0.01, 0.04}, {6.73, 15.23}, {8.24, 18.15}},
    {1.0, 0.5, 0.8, {8.83, 15.75}, {0.02, 0.02}, {8.83, 15.79}, {9.89, 18.62}},
    {1.0, 0.1, 0.5, {6.43, 15.11}, {0.01, 0.03}, {6.44, 15.15}, {8.12, 18.07}},
    {1.0, 0.2, 0.5, {6.44, 15.12}, {0.01, 0.03}, {6.44, 15.16}, {8.12, 18.07}},
    {1.0, 0.5, 0.5, {6.49, 15.15}, {0.01, 0.05}, {6.49, 15.19}, {8.14, 18.10}},
    {3.0, 0.1, 1.0, {14.70, 27.00}, {0.02, 0.07}, {14.71, 27.03}, {17.46, 31.92}},
    {3.0, 0.2, 1.0, {16.85, 28.08}, {0.03, 0.06}, {16.79, 28.04}, {19.11, 32.93}},
    {3.0, 0.5, 1.0, {27.99, 35.31}, {0.04, 0.06}, {26.51, 33.92}, {29.19, 39.44}},
    {3.0, 0.1, 0.8, {14.27, 26.64}, {0.02, 0.07}, {14.29, 26.74}, {17.12, 31.63}},
    {3.0, 0.2, 0.8, {14.48, 26.82}, {0.02, 0.07}, {14.49, 26.91}, {17.30, 31.79}},
    {3.0, 0.5, 0.8, {16.81, 28.07}, {0.02, 0.06}, {16.80, 28.09}, {19.09, 32.92}},
    {3.0, 0.1, 0.5, {14.22, 26.58}, {0.01, 0.04}, {14.23, 26.68}, {17.07, 31.58}},
    {3.0, 0.2, 0.5, {14.23, 26.62}, {0.01, 0.05}, {14.25, 26.69}, {17.07, 31.59}},
    {3.0, 0.5, 0.5, {14.31, 26.71}, {0.02, 0.06}, {14.32, 26.78}, {17.15, 31.66}},
};

inline constexpr double kJumpIntensities[2] = {0.3, 1.0};

// constant jump variable, sigma(t, S) = 0.2
struct ConstantJumpRow {
    double lambda;
    double log_size;  // y
    double maturity;
    double mc;
    double mc_sd;
    double ae;
};

inline constexpr ConstantJumpRow kTable3[] = {
    {0.3, -0.25, 1.0, 7.35, 0.01, 7.35},
    {0.3, -0.25, 3.0, 12.93, 0.01, 12.85},
    {0.3, -0.125, 1.0, 6.08, 0.01, 6.07},
    {0.3, -0.125, 3.0, 10.57, 0.01, 10.49},
    {0.3, -0.0625, 1.0, 5.66, 0.01, 5.65},
    {0.3, -0.0625, 3.0, 9.83, 0.01, 9.74},
    {1.0, -0.25, 1.0, 10.78, 0.01, 10.78},
    {1.0, -0.25, 3.0, 18.64, 0.01, 18.57},
    {1.0, -0.125, 1.0, 7.28, 0.01, 7.28},
    {1.0, -0.125, 3.0, 12.65, 0.01, 12.58},
    {1.0, -0.0625, 1.0, 6.02, 0.01, 6.01},
    {1.0, -0.0625, 3.0, 10.45, 0.01, 10.37},
};

}  // namespace reference

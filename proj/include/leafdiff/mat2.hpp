#pragma once

#include <array>
#include <cmath>

namespace leafdiff {

// small dense 2x2 real matrix, row major
struct Mat2 {
    double m00 = 1, m01 = 0, m10 = 0, m11 = 1;

    static Mat2 identity() { return {}; }

    double det() const { return m00 * m11 - m01 * m10; }

    Mat2 operator*(const Mat2& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }

    Mat2 operator*(double s) const { return {m00 * s, m01 * s, m10 * s, m11 * s}; }

    Mat2 inverse() const {
        double d = det();
        return {m11 / d, -m01 / d, -m10 / d, m00 / d};
    }

    // singular values, descending
    std::array<double, 2> singular_values() const {
        double a = m00 * m00 + m01 * m01 + m10 * m10 + m11 * m11;
        double d = det();
        double disc = std::sqrt(std::max(0.0, a * a - 4.0 * d * d));
        double s1 = std::sqrt(std::max(0.0, (a + disc) / 2));
        double s2 = std::sqrt(std::max(0.0, (a - disc) / 2));
        return {s1, s2};
    }

    // Gram-Schmidt QR: returns Q, writes |r00|,|r11| (positive diagonal)
    Mat2 qr(double& r00, double& r11) const {
        double n0 = std::sqrt(m00 * m00 + m10 * m10);
        double q00 = m00 / n0, q10 = m10 / n0;
        double proj = q00 * m01 + q10 * m11;
        double c0 = m01 - proj * q00, c1 = m11 - proj * q10;
        double n1 = std::sqrt(c0 * c0 + c1 * c1);
        r00 = n0;
        r11 = n1;
        return {q00, c0 / n1, q10, c1 / n1};
    }
};

} // namespace leafdiff

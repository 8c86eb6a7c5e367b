#pragma once

// Independent reference solver for the readout tests: plain Gaussian elimination
// with partial pivoting on the (ridge) normal equations.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double lambda)
{
    const int n = static_cast<int>(x.cols());
    const int m = static_cast<int>(y.cols());
    std::vector<std::vector<double>> a(n, std::vector<double>(n + m, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int t = 0; t < x.rows(); ++t) s += x(t, i) * x(t, j);
            a[i][j] = s;
        }
        if (i > 0) a[i][i] += lambda;
        for (int k = 0; k < m; ++k) {
            double s = 0.0;
            for (int t = 0; t < x.rows(); ++t) s += x(t, i) * y(t, k);
            a[i][n + k] = s;
        }
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        std::swap(a[col], a[piv]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < n + m; ++c) a[r][c] -= f * a[col][c];
        }
    }
    Eigen::MatrixXd w(n, m);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < m; ++k) w(i, k) = a[i][n + k] / a[i][i];
    }
    return w;
}

} // namespace oracle

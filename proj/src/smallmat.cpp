#include "perfomag/smallmat.hpp"

#include <algorithm>

namespace perfomag {

EigenSym3 jacobi_eigen_sym3(const Mat3& m_in, double tol) {
    Mat3 a = m_in.sym();
    Mat3 v = Mat3::identity();
    const double scale = std::max(a.norm_inf(), 1e-300);

    auto offdiag = [](const Mat3& m) {
        return std::sqrt(m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) +
                         m(1, 2) * m(1, 2));
    };

    for (int sweep = 0; sweep < 64 && offdiag(a) > tol * scale; ++sweep) {
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                double apq = a(p, q);
                if (apq == 0.0) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                Mat3 r = Mat3::identity();
                r(p, p) = c;
                r(q, q) = c;
                r(p, q) = s;
                r(q, p) = -s;
                // a <- r^T a r, v <- v r
                Mat3 ar;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double sum = 0.0;
                        for (int k = 0; k < 3; ++k) sum += a(i, k) * r(k, j);
                        ar(i, j) = sum;
                    }
                Mat3 rt_ar;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double sum = 0.0;
                        for (int k = 0; k < 3; ++k) sum += r(k, i) * ar(k, j);
                        rt_ar(i, j) = sum;
                    }
                a = rt_ar;
                Mat3 vr;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double sum = 0.0;
                        for (int k = 0; k < 3; ++k) sum += v(i, k) * r(k, j);
                        vr(i, j) = sum;
                    }
                v = vr;
            }
        }
    }

    EigenSym3 out;
    std::array<int, 3> order = {0, 1, 2};
    std::array<double, 3> d = {a(0, 0), a(1, 1), a(2, 2)};
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return d[i] < d[j]; });
    for (int k = 0; k < 3; ++k) {
        out.values[k] = d[order[k]];
        for (int i = 0; i < 3; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

}  // namespace perfomag

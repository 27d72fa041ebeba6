#pragma once

#include <Eigen/Dense>

#include <fstream>
#include <string>
#include <vector>

#include "l2g2g/errors.hpp"
#include "l2g2g/graph.hpp"

namespace l2g2g {

// Rigid motion in embedding space: z -> S z + t with S orthogonal.
// Applied to row-major embeddings as Z S^T + 1 t^T.
struct Transform {
    Matrix rotation;     // e x e, orthogonal
    Vector translation;  // e

    static Transform identity(int e) {
        return {Matrix::Identity(e, e), Vector::Zero(e)};
    }

    Matrix apply(const Matrix& z) const {
        return (z * rotation.transpose()).rowwise() + translation.transpose();
    }

    double orthogonality_defect() const {
        const int e = static_cast<int>(rotation.rows());
        return (rotation.transpose() * rotation - Matrix::Identity(e, e))
            .cwiseAbs()
            .maxCoeff();
    }
};

inline void save_transforms(const std::string& path, const std::vector<Transform>& ts) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write transform file: " + path);
    out.precision(17);
    for (const auto& t : ts) {
        for (Eigen::Index i = 0; i < t.rotation.rows(); ++i) {
            for (Eigen::Index j = 0; j < t.rotation.cols(); ++j)
                out << (j ? " " : "") << t.rotation(i, j);
            out << "\n";
        }
        for (Eigen::Index i = 0; i < t.translation.size(); ++i)
            out << (i ? " " : "") << t.translation[i];
        out << "\n";
    }
}

inline std::vector<Transform> load_transforms(const std::string& path, int k, int e) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open transform file: " + path);
    std::vector<Transform> ts;
    ts.reserve(k);
    for (int p = 0; p < k; ++p) {
        Transform t{Matrix(e, e), Vector(e)};
        for (int i = 0; i < e; ++i)
            for (int j = 0; j < e; ++j)
                if (!(in >> t.rotation(i, j))) throw FormatError("truncated transform file");
        for (int i = 0; i < e; ++i)
            if (!(in >> t.translation[i])) throw FormatError("truncated transform file");
        ts.push_back(std::move(t));
    }
    return ts;
}

}  // namespace l2g2g

#pragma once

// Binary container for a FinalExpansion (layout in docs/format.md) and CSV tables.

#include "ttkl/cumulant.hpp"
#include "ttkl/error.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ttkl {

inline constexpr char kContainerMagic[8] = {'T', 'T', 'K', 'L', 'E', 'X', 'P', '\0'};
inline constexpr std::uint32_t kContainerVersion = 1;

/// Everything `verify` and `sample-modes` need, with the trains kept when available.
struct SavedExpansion {
    FinalExpansion expansion;
    std::optional<FunctionTrain> train2;
    std::optional<FunctionTrain> train3;
};

namespace io {

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
        return v;
    }
}

class Writer {
public:
    explicit Writer(std::ostream& os) : os_(os) {}

    template <class T>
    void put(T v) {
        v = to_little(v);
        os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void u64(std::size_t v) { put<std::uint64_t>(static_cast<std::uint64_t>(v)); }
    void f64(double v) { put<double>(v); }

    void vector(const Eigen::VectorXd& v) {
        u64(static_cast<std::size_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
    }
    void matrix(const Eigen::MatrixXd& m) {
        u64(static_cast<std::size_t>(m.rows()));
        u64(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
    }
    void tensor(const Tensor3& t) {
        for (std::size_t k = 0; k < 3; ++k) u64(t.dim(k));
        for (double v : t.data()) f64(v);
    }
    void functions(const FunctionMatrix& fm) {
        u64(fm.rows());
        u64(fm.cols());
        for (const auto& e : fm.entries()) {
            f64(e.domain().lo);
            f64(e.domain().hi);
            u64(e.coeffs().size());
            for (double c : e.coeffs()) f64(c);
        }
    }
    void train(const FunctionTrain& t) {
        u64(t.dim());
        for (const auto& c : t.cores()) functions(c);
    }

private:
    std::ostream& os_;
};

class Reader {
public:
    explicit Reader(std::istream& is) : is_(is) {}

    template <class T>
    T get() {
        T v;
        is_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!is_) throw FormatError("container truncated");
        return to_little(v);
    }
    std::size_t u64() {
        const auto v = get<std::uint64_t>();
        if (v > (std::uint64_t{1} << 40)) throw FormatError("implausible size field");
        return static_cast<std::size_t>(v);
    }
    double f64() { return get<double>(); }

    Eigen::VectorXd vector() {
        Eigen::VectorXd v(static_cast<Eigen::Index>(u64()));
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = f64();
        return v;
    }
    Eigen::MatrixXd matrix() {
        const auto r = static_cast<Eigen::Index>(u64());
        const auto c = static_cast<Eigen::Index>(u64());
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = f64();
        return m;
    }
    Tensor3 tensor() {
        const std::size_t a = u64(), b = u64(), c = u64();
        Tensor3 t(a, b, c);
        for (double& v : t.data()) v = f64();
        return t;
    }
    FunctionMatrix functions() {
        const std::size_t r = u64(), c = u64();
        std::vector<AdaptiveFunction> es;
        es.reserve(r * c);
        for (std::size_t k = 0; k < r * c; ++k) {
            Interval d;
            d.lo = f64();
            d.hi = f64();
            std::vector<double> coeffs(u64());
            for (double& v : coeffs) v = f64();
            es.push_back(AdaptiveFunction::from_raw(d, std::move(coeffs)));
        }
        return FunctionMatrix(r, c, std::move(es));
    }
    FunctionTrain train() {
        std::vector<FunctionMatrix> cores(u64());
        for (auto& c : cores) c = functions();
        return FunctionTrain(std::move(cores));
    }

private:
    std::istream& is_;
};

enum Flags : std::uint32_t { kHasCum3 = 1, kHasTrain2 = 2, kHasTrain3 = 4 };

} // namespace io

inline void write_expansion(std::ostream& os, const SavedExpansion& s) {
    const FinalExpansion& fe = s.expansion;
    io::Writer w(os);
    os.write(kContainerMagic, 8);
    w.put<std::uint32_t>(kContainerVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(fe.modes.m));
    std::uint32_t flags = 0;
    if (fe.cum3) flags |= io::kHasCum3;
    if (s.train2) flags |= io::kHasTrain2;
    if (s.train3) flags |= io::kHasTrain3;
    w.put<std::uint32_t>(flags);
    w.put<std::uint32_t>(0);
    w.u64(fe.modes.count());
    w.u64(fe.latent());

    w.functions(fe.modes.f);
    w.vector(fe.modes.eig_f);
    if (fe.modes.m > 1) {
        w.functions(*fe.modes.g);
        w.vector(fe.modes.eig_g);
    }
    if (fe.modes.m > 2) {
        w.functions(*fe.modes.h);
        w.vector(fe.modes.eig_h);
    }
    w.matrix(fe.u3);
    w.vector(fe.lambda2);
    w.matrix(fe.cum2);
    w.vector(fe.lambda3);
    if (fe.cum3)
        for (const auto& c : fe.cum3->cores) w.tensor(c);
    if (s.train2) w.train(*s.train2);
    if (s.train3) w.train(*s.train3);
    if (!os) throw FormatError("write failed");
}

inline SavedExpansion read_expansion(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kContainerMagic, 8) != 0) throw FormatError("not a ttkl expansion container");
    io::Reader r(is);
    const auto version = r.get<std::uint32_t>();
    if (version != kContainerVersion) throw FormatError("unsupported container version " + std::to_string(version));
    const auto m = r.get<std::uint32_t>();
    if (m < 1 || m > 3) throw FormatError("parametric dimension out of range");
    const auto flags = r.get<std::uint32_t>();
    r.get<std::uint32_t>();
    const std::size_t n_modes = r.u64(), n_latent = r.u64();

    SavedExpansion s;
    FinalExpansion& fe = s.expansion;
    fe.modes.m = m;
    fe.modes.f = r.functions();
    fe.modes.eig_f = r.vector();
    if (m > 1) {
        fe.modes.g = r.functions();
        fe.modes.eig_g = r.vector();
    }
    if (m > 2) {
        fe.modes.h = r.functions();
        fe.modes.eig_h = r.vector();
    }
    fe.u3 = r.matrix();
    fe.lambda2 = r.vector();
    fe.cum2 = r.matrix();
    fe.lambda3 = r.vector();
    if (flags & io::kHasCum3) {
        LatentCumulant3 lc;
        for (auto& c : lc.cores) c = r.tensor();
        fe.cum3 = std::move(lc);
    }
    if (flags & io::kHasTrain2) s.train2 = r.train();
    if (flags & io::kHasTrain3) s.train3 = r.train();
    if (fe.modes.count() != n_modes || fe.latent() != n_latent || static_cast<std::size_t>(fe.u3.rows()) != n_modes)
        throw FormatError("container header disagrees with its payload");
    return s;
}

inline void save_expansion(const std::string& path, const SavedExpansion& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    write_expansion(os, s);
}

inline SavedExpansion load_expansion(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    return read_expansion(is);
}

namespace csv {

/// index,value rows, 1-based index.
inline void write_eigenvalues(std::ostream& os, const Eigen::VectorXd& v) {
    os << "index,value\n";
    os.precision(17);
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i + 1) << ',' << v(i) << '\n';
}

/// One row per grid coordinate; column j holds entry (block, j) of a directional mode matrix.
inline void write_mode_samples(std::ostream& os, const FunctionMatrix& modes, std::size_t grid, const std::string& axis) {
    os << axis;
    for (std::size_t b = 0; b < modes.rows(); ++b)
        for (std::size_t j = 0; j < modes.cols(); ++j) os << ",m" << b + 1 << '_' << j + 1;
    os << '\n';
    os.precision(17);
    for (std::size_t k = 0; k < grid; ++k) {
        const double x = grid == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(grid - 1);
        const Eigen::MatrixXd v = modes(x);
        os << x;
        for (Eigen::Index b = 0; b < v.rows(); ++b)
            for (Eigen::Index j = 0; j < v.cols(); ++j) os << ',' << v(b, j);
        os << '\n';
    }
}

/// Header line then numeric rows; returns the rows.
inline std::vector<std::vector<double>> read_table(std::istream& is, std::vector<std::string>* header = nullptr) {
    std::string line;
    if (!std::getline(is, line)) throw FormatError("empty table");
    if (header) {
        header->clear();
        std::size_t pos = 0;
        while (true) {
            const auto next = line.find(',', pos);
            header->push_back(line.substr(pos, next - pos));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (true) {
            const auto next = line.find(',', pos);
            try {
                row.push_back(std::stod(line.substr(pos, next - pos)));
            } catch (const std::exception&) {
                throw FormatError("non-numeric cell in table: " + line);
            }
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace csv

} // namespace ttkl

#include "qhex/dti.hpp"

#include <cmath>
#include <cstdio>

#include "qhex/error.hpp"
#include "qhex/io_util.hpp"

namespace qhex {

DtiDesign::DtiDesign(const std::vector<Volume4D::Channel>& channels,
                     const std::string& scheme_name) {
    rows_ = static_cast<Eigen::Index>(channels.size());
    if (rows_ < 7) throw ValidationError("need at least 7 channels for a DTI fit");
    Eigen::MatrixXd A(rows_, 7);
    for (Eigen::Index i = 0; i < rows_; ++i) {
        const double b = channels[static_cast<std::size_t>(i)].bval;
        const Eigen::Vector3d& g = channels[static_cast<std::size_t>(i)].dir;
        A(i, 0) = 1.0;
        A(i, 1) = -b * g.x() * g.x();
        A(i, 2) = -b * g.y() * g.y();
        A(i, 3) = -b * g.z() * g.z();
        A(i, 4) = -2.0 * b * g.x() * g.y();
        A(i, 5) = -2.0 * b * g.x() * g.z();
        A(i, 6) = -2.0 * b * g.y() * g.z();
    }
    qr_.compute(A);
    if (qr_.rank() < 7)
        throw ValidationError("rank-deficient DTI design" +
                              (scheme_name.empty() ? std::string() : ": " + scheme_name));
}

DtiFit DtiDesign::fit(const Eigen::VectorXd& signals) const {
    if (signals.size() != rows_) throw ValidationError("signal count does not match design");
    Eigen::VectorXd y(rows_);
    for (Eigen::Index i = 0; i < rows_; ++i) {
        if (!(signals(i) > 0.0)) throw ValidationError("non-positive signal in DTI fit");
        y(i) = std::log(signals(i));
    }
    const Eigen::VectorXd x = qr_.solve(y);

    Eigen::Matrix3d m;
    m << x(1), x(4), x(5), x(4), x(2), x(6), x(5), x(6), x(3);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);

    DtiFit out;
    out.log_s0 = x(0);
    if (es.eigenvalues().minCoeff() < 0.0) {
        const Eigen::Vector3d lam = es.eigenvalues().cwiseMax(0.0);
        const Eigen::Matrix3d rebuilt =
            es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
        out.d = Tensor3::from_matrix(rebuilt);
        out.clamped = true;
    } else {
        out.d = Tensor3::from_matrix(m);
    }
    return out;
}

TensorField fit_dti(const Volume4D& v, const std::vector<std::uint8_t>& mask) {
    if (!v.has_channel_table()) throw ValidationError("volume has no channel table");
    if (v.nc() < 7) throw ValidationError("need at least 7 channels for a DTI fit");
    if (!v.b0_first) throw ValidationError("DTI fit expects a leading b0 channel");
    if (mask.size() != v.voxel_count()) throw ValidationError("mask size mismatch");

    const DtiDesign design(v.channels(), v.scheme_path);
    TensorField f;
    f.nx = v.nx();
    f.ny = v.ny();
    f.nz = v.nz();
    const std::size_t nvox = v.voxel_count();
    f.tensors.assign(nvox, Tensor3::isotropic(0.0));
    f.log_s0.assign(nvox, 0.0);
    f.valid.assign(nvox, 0);
    f.fitted.assign(nvox, 0);

    Eigen::VectorXd sig(v.nc());
    const std::size_t stride = nvox;
    for (std::size_t i = 0; i < nvox; ++i) {
        if (!mask[i]) continue;
        for (int c = 0; c < v.nc(); ++c)
            sig(c) = v.data()[i + stride * static_cast<std::size_t>(c)];
        const DtiFit r = design.fit(sig);
        f.tensors[i] = r.d;
        f.log_s0[i] = r.log_s0;
        f.valid[i] = r.clamped ? 0 : 1;
        f.fitted[i] = 1;
    }
    return f;
}

double md(const Tensor3& d) {
    const auto lam = d.eigenvalues();
    return (lam[0] + lam[1] + lam[2]) / 3.0;
}

double fa(const Tensor3& d) {
    const auto lam = d.eigenvalues();
    const double mean = (lam[0] + lam[1] + lam[2]) / 3.0;
    double num = 0.0, den = 0.0;
    for (const double l : lam) {
        num += (l - mean) * (l - mean);
        den += l * l;
    }
    if (den <= 0.0) return 0.0;
    const double v = std::sqrt(1.5 * num / den);
    return std::min(1.0, std::max(0.0, v));
}

namespace {

Volume4D metric_map(const TensorField& f, double (*metric)(const Tensor3&)) {
    Volume4D out(f.nx, f.ny, f.nz, 1);
    for (std::size_t i = 0; i < f.tensors.size(); ++i)
        if (f.fitted[i]) out.data()[i] = static_cast<float>(metric(f.tensors[i]));
    return out;
}

} // namespace

Volume4D fa_map(const TensorField& f) { return metric_map(f, &fa); }
Volume4D md_map(const TensorField& f) { return metric_map(f, &md); }

EvalReport evaluate(const Volume4D& pred, const Volume4D& truth, const NestedScheme& scheme,
                    const std::vector<std::uint8_t>& mask) {
    scheme.validate();
    if (pred.nx() != truth.nx() || pred.ny() != truth.ny() || pred.nz() != truth.nz() ||
        pred.nc() != truth.nc())
        throw ValidationError("pred/truth shape mismatch");
    if (pred.nc() != 1 + static_cast<int>(scheme.har.size()))
        throw ValidationError("volume channel count does not match scheme");
    if (mask.size() != pred.voxel_count()) throw ValidationError("mask size mismatch");

    std::vector<std::size_t> voxels;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) voxels.push_back(i);
    if (voxels.empty()) throw ValidationError("empty mask");

    EvalReport r;
    const std::size_t stride = pred.voxel_count();
    for (const int u : scheme.unknown_indices) {
        const std::size_t coff = stride * static_cast<std::size_t>(1 + u);
        double se = 0.0, mean = 0.0;
        for (const std::size_t i : voxels) {
            const double p = pred.data()[i + coff];
            const double t = truth.data()[i + coff];
            se += (p - t) * (p - t);
            mean += t;
        }
        mean /= static_cast<double>(voxels.size());
        if (!(mean > 0.0)) throw ValidationError("zero mean truth signal");
        const double rmse = std::sqrt(se / static_cast<double>(voxels.size()));
        r.direction.push_back(u);
        r.nrmse.push_back(rmse / mean);
    }
    double acc = 0.0;
    for (const double v : r.nrmse) acc += v;
    r.mean_nrmse = acc / static_cast<double>(r.nrmse.size());

    const TensorField fp = fit_dti(pred, mask);
    const TensorField ft = fit_dti(truth, mask);
    double fa_se = 0.0, md_se = 0.0;
    for (const std::size_t i : voxels) {
        const double dfa = fa(fp.tensors[i]) - fa(ft.tensors[i]);
        const double dmd = md(fp.tensors[i]) - md(ft.tensors[i]);
        fa_se += dfa * dfa;
        md_se += dmd * dmd;
    }
    r.fa_rmse = std::sqrt(fa_se / static_cast<double>(voxels.size()));
    r.md_rmse = std::sqrt(md_se / static_cast<double>(voxels.size()));
    r.coverage = static_cast<double>(voxels.size()) / static_cast<double>(mask.size());
    return r;
}

void attach_baseline(EvalReport& r, const EvalReport& baseline) {
    if (baseline.direction != r.direction)
        throw ValidationError("baseline report covers different directions");
    r.baseline_nrmse = baseline.nrmse;
    r.delta_nrmse.resize(r.nrmse.size());
    for (std::size_t i = 0; i < r.nrmse.size(); ++i)
        r.delta_nrmse[i] = r.nrmse[i] - baseline.nrmse[i];
}

void save_eval_csv(const EvalReport& r, const std::filesystem::path& path) {
    std::string out = "metric,direction_index,value\n";
    char line[96];
    auto row = [&](const char* name, int dir, double v) {
        std::snprintf(line, sizeof line, "%s,%d,%.17g\n", name, dir, v);
        out += line;
    };
    for (std::size_t i = 0; i < r.nrmse.size(); ++i) row("nrmse", r.direction[i], r.nrmse[i]);
    for (std::size_t i = 0; i < r.baseline_nrmse.size(); ++i)
        row("baseline_nrmse", r.direction[i], r.baseline_nrmse[i]);
    for (std::size_t i = 0; i < r.delta_nrmse.size(); ++i)
        row("delta_nrmse", r.direction[i], r.delta_nrmse[i]);
    row("mean_nrmse", -1, r.mean_nrmse);
    row("fa_rmse", -1, r.fa_rmse);
    row("md_rmse", -1, r.md_rmse);
    row("coverage", -1, r.coverage);
    write_file_atomic(path, out);
}

} // namespace qhex

#ifndef QHEX_DTI_HPP
#define QHEX_DTI_HPP

#include <filesystem>
#include <vector>

#include "qhex/phantom.hpp"
#include "qhex/volume.hpp"

namespace qhex {

struct DtiFit {
    Tensor3 d = Tensor3::isotropic(0.0);
    double log_s0 = 0.0;
    bool clamped = false; // negative eigenvalue clamped to 0
};

// Shared log-linear design for one channel table: rows
// (1, -b gx^2, -b gy^2, -b gz^2, -2b gx gy, -2b gx gz, -2b gy gz)
// solved by column-pivoting QR. Throws if the scheme is rank deficient.
class DtiDesign {
public:
    explicit DtiDesign(const std::vector<Volume4D::Channel>& channels,
                       const std::string& scheme_name = {});

    int n_channels() const { return static_cast<int>(rows_); }

    // Ordinary least squares on log signals; all signals must be > 0.
    DtiFit fit(const Eigen::VectorXd& signals) const;

private:
    Eigen::Index rows_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

struct TensorField {
    int nx = 0, ny = 0, nz = 0;
    std::vector<Tensor3> tensors;        // voxel-linear order; zero when not fitted
    std::vector<double> log_s0;
    std::vector<std::uint8_t> valid;     // 1 = fitted without clamping
    std::vector<std::uint8_t> fitted;    // 1 = voxel was in the mask
};

// Per-voxel OLS fit over the mask. The volume needs >= 7 channels including
// b0 and an attached channel table.
TensorField fit_dti(const Volume4D& v, const std::vector<std::uint8_t>& mask);

// MD = mean eigenvalue; FA = sqrt(3/2) * ||lambda - MD|| / ||lambda||, 0 for
// the zero tensor; clamped into [0,1].
double md(const Tensor3& d);
double fa(const Tensor3& d);

// 1-channel f32 maps; voxels outside the fitted mask are 0.
Volume4D fa_map(const TensorField& f);
Volume4D md_map(const TensorField& f);

struct EvalReport {
    std::vector<int> direction;        // HAR indices of the unknown channels
    std::vector<double> nrmse;         // per direction, RMSE / mean truth signal
    double mean_nrmse = 0.0;
    double fa_rmse = 0.0;
    double md_rmse = 0.0;
    double coverage = 0.0;
    std::vector<double> baseline_nrmse; // filled by attach_baseline
    std::vector<double> delta_nrmse;    // model minus baseline
};

// Signal NRMSE per unknown direction plus FA/MD RMSE from DTI fits of both
// volumes over the mask.
EvalReport evaluate(const Volume4D& pred, const Volume4D& truth, const NestedScheme& scheme,
                    const std::vector<std::uint8_t>& mask);

// Record a paired baseline evaluation (same scheme and mask) for delta rows.
void attach_baseline(EvalReport& r, const EvalReport& baseline);

// CSV rows metric,direction_index,value; summary rows use index -1.
void save_eval_csv(const EvalReport& r, const std::filesystem::path& path);

} // namespace qhex

#endif

// qhex: angular upsampling pipeline for diffusion q-space volumes.
//
// Exit codes: 0 ok, 1 internal, 2 usage, 3 I/O, 4 validation, 5 divergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "qhex/dataset.hpp"
#include "qhex/dti.hpp"
#include "qhex/error.hpp"
#include "qhex/hemihex.hpp"
#include "qhex/mlp.hpp"
#include "qhex/phantom.hpp"
#include "qhex/scheme.hpp"
#include "qhex/upsample.hpp"
#include "qhex/volume_io.hpp"

namespace {

using namespace qhex;

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::vector<std::uint8_t> load_mask_volume(const std::string& path, std::size_t expected) {
    const Volume4D m = read_dvol(path);
    if (m.nc() != 1) throw ValidationError("mask volume must have a single channel");
    if (m.voxel_count() != expected) throw ValidationError("mask volume dims mismatch");
    std::vector<std::uint8_t> mask(expected);
    for (std::size_t i = 0; i < expected; ++i) mask[i] = m.data()[i] != 0.0f ? 1 : 0;
    return mask;
}

// all-signals-positive mask, the fit-dti default
std::vector<std::uint8_t> positive_mask(const Volume4D& v) {
    std::vector<std::uint8_t> mask(v.voxel_count(), 1);
    const std::size_t stride = v.voxel_count();
    for (std::size_t i = 0; i < stride; ++i)
        for (int c = 0; c < v.nc(); ++c)
            if (!(v.data()[i + stride * static_cast<std::size_t>(c)] > 0.0f)) {
                mask[i] = 0;
                break;
            }
    return mask;
}

struct GenSchemeArgs {
    std::size_t n_lar = 21, n_har = 61, pool = 4000;
    std::uint64_t seed = 7;
    double bval = 1000.0;
    std::string out;
};

void cmd_gen_scheme(const GenSchemeArgs& a) {
    const NestedScheme s = build_nested(a.n_lar, a.n_har, a.pool, a.seed, a.bval);
    save_scheme(s, a.out);
    std::printf("lar: %zu directions, min angle %.6f deg\n", s.lar_count(),
                min_pairwise_angle(s.lar()) * kRadToDeg);
    std::printf("har: %zu directions, min angle %.6f deg\n", s.har.size(),
                min_pairwise_angle(s.har) * kRadToDeg);
}

struct MakePhantomArgs {
    std::string type = "mixed";
    std::string scheme, out_har, out_lar, out_regions;
    int nx = 16, ny = 16, nz = 8;
    double s0 = 1000.0, noise_sigma = 0.0;
    std::uint64_t seed = 1;
};

void cmd_make_phantom(const MakePhantomArgs& a) {
    const NestedScheme scheme = load_scheme(a.scheme);
    PhantomSpec spec = a.type == "mixed" ? PhantomSpec::desk_mixed(a.seed, a.nx, a.ny, a.nz)
                                         : PhantomSpec::desk_isotropic(a.seed, a.nx, a.ny, a.nz);
    spec.s0 = a.s0;
    spec.noise_sigma = a.noise_sigma;
    auto [har, lar] = make_phantom(spec, scheme);
    har.scheme_path = a.scheme;
    lar.scheme_path = a.scheme;
    write_dvol(har, a.out_har);
    write_dvol(lar, a.out_lar);
    if (!a.out_regions.empty()) write_dvol(region_volume(spec), a.out_regions);
    std::printf("phantom %s %dx%dx%d: har %d channels, lar %d channels\n", a.type.c_str(), a.nx,
                a.ny, a.nz, har.nc(), lar.nc());
}

struct BuildDatasetArgs {
    std::string lar, har, scheme, out, regions, mask;
    double val_fraction = 1.0 / 3.0;
};

void cmd_build_dataset(const BuildDatasetArgs& a) {
    const NestedScheme scheme = load_scheme(a.scheme);
    Volume4D lar = read_dvol(a.lar);
    Volume4D har = read_dvol(a.har);
    lar.attach_lar_channels(scheme);
    har.attach_har_channels(scheme);

    const auto nbhds = decompose(scheme);
    const auto mask =
        a.mask.empty() ? make_interior_mask(lar) : load_mask_volume(a.mask, lar.voxel_count());
    const auto samples = extract_samples(lar, har, scheme, nbhds, mask);

    // Provenance: region volume labels if given, else three z-slabs.
    std::vector<std::string> prov;
    prov.reserve(samples.size());
    if (!a.regions.empty()) {
        const Volume4D reg = read_dvol(a.regions);
        if (reg.nc() != 1 || reg.voxel_count() != lar.voxel_count())
            throw ValidationError("region volume dims mismatch");
        for (const auto& s : samples) {
            const auto r = reg.at(s.vx, s.vy, s.vz, 0);
            prov.push_back("region" + std::to_string(static_cast<int>(r)));
        }
    } else {
        for (const auto& s : samples) {
            const int slab = std::min(2, s.vz * 3 / std::max(1, lar.nz()));
            prov.push_back("slab" + std::to_string(slab));
        }
    }

    const DataSplit split = split_by_region(samples, prov, a.val_fraction);
    save_samples(split.train, a.out + ".train.qhxd");
    save_samples(split.val, a.out + ".val.qhxd");
    std::printf("dataset: %zu train, %zu val samples (%zu neighborhoods)\n", split.train.size(),
                split.val.size(), nbhds.size());
}

struct TrainArgs {
    std::string dataset, out_model, out_log, config;
    std::uint64_t seed = 1;
    int epochs = 0;     // 0 = keep per-phase defaults
    int batch_size = 0; // 0 = keep defaults
};

TrainConfig load_train_config(const TrainArgs& a) {
    TrainConfig cfg;
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in) throw IoError("cannot open config: " + a.config);
        const nlohmann::json j = nlohmann::json::parse(in);
        if (j.contains("phases")) {
            cfg.phases.clear();
            for (const auto& p : j.at("phases")) {
                TrainPhase ph;
                ph.optimizer = p.at("optimizer").get<std::string>();
                ph.lr = p.value("lr", ph.lr);
                ph.epochs = p.value("epochs", ph.epochs);
                ph.batch_size = p.value("batch_size", ph.batch_size);
                cfg.phases.push_back(ph);
            }
        }
        if (j.contains("dims")) cfg.dims = j.at("dims").get<std::vector<int>>();
        cfg.seed = j.value("seed", cfg.seed);
        cfg.momentum = j.value("momentum", cfg.momentum);
        cfg.beta1 = j.value("beta1", cfg.beta1);
        cfg.beta2 = j.value("beta2", cfg.beta2);
        cfg.adam_eps = j.value("adam_eps", cfg.adam_eps);
        cfg.rho = j.value("rho", cfg.rho);
        cfg.rms_eps = j.value("rms_eps", cfg.rms_eps);
    }
    cfg.seed = a.seed;
    for (auto& ph : cfg.phases) {
        if (a.epochs > 0) ph.epochs = a.epochs;
        if (a.batch_size > 0) ph.batch_size = a.batch_size;
    }
    return cfg;
}

void cmd_train(const TrainArgs& a) {
    DataSplit split;
    split.train = load_samples(a.dataset + ".train.qhxd");
    split.val = load_samples(a.dataset + ".val.qhxd");
    const TrainConfig cfg = load_train_config(a);
    MLPParams p = mlp_init(cfg.dims, cfg.seed);
    auto [trained, log] = train(std::move(p), split, cfg);
    save_model(trained, a.out_model);
    if (!a.out_log.empty()) save_train_log(log, a.out_log);
    const auto& last = log.records.back();
    std::printf("trained %zu iterations, final train rmse %.6g val rmse %.6g\n",
                log.records.size(), last.train_rmse, last.val_rmse);
}

struct UpsampleArgs {
    std::string lar, scheme, model, out, mask;
    bool baseline = false;
};

void cmd_upsample(const UpsampleArgs& a) {
    const NestedScheme scheme = load_scheme(a.scheme);
    Volume4D lar = read_dvol(a.lar);
    lar.attach_lar_channels(scheme);
    const auto nbhds = decompose(scheme);
    const auto mask =
        a.mask.empty() ? make_interior_mask(lar) : load_mask_volume(a.mask, lar.voxel_count());

    PredictReport report;
    Volume4D out;
    if (a.baseline) {
        out = predict_volume_baseline(lar, scheme, nbhds, mask, &report);
    } else {
        const MLPParams model = load_model(a.model);
        out = predict_volume(lar, model, scheme, nbhds, mask, &report);
    }
    out.scheme_path = a.scheme;
    write_dvol(out, a.out);
    std::printf("upsampled %d -> %d channels, coverage %.6f\n", lar.nc(), out.nc(),
                report.coverage());
}

struct FitDtiArgs {
    std::string vol, out_fa, out_md, mask;
};

void cmd_fit_dti(const FitDtiArgs& a) {
    Volume4D v = read_dvol(a.vol);
    if (v.scheme_path.empty()) throw ValidationError("volume records no scheme path");
    v.attach_channels(load_scheme(v.scheme_path));
    const auto mask = a.mask.empty() ? positive_mask(v) : load_mask_volume(a.mask, v.voxel_count());
    const TensorField f = fit_dti(v, mask);
    write_dvol(fa_map(f), a.out_fa);
    write_dvol(md_map(f), a.out_md);
    std::size_t fitted = 0, clamped = 0;
    for (std::size_t i = 0; i < f.fitted.size(); ++i) {
        if (f.fitted[i]) ++fitted;
        if (f.fitted[i] && !f.valid[i]) ++clamped;
    }
    std::printf("fit %zu voxels, %zu with clamped eigenvalues\n", fitted, clamped);
}

struct EvaluateArgs {
    std::string pred, truth, scheme, out, mask;
};

void cmd_evaluate(const EvaluateArgs& a) {
    const NestedScheme scheme = load_scheme(a.scheme);
    Volume4D pred = read_dvol(a.pred);
    Volume4D truth = read_dvol(a.truth);
    pred.attach_har_channels(scheme);
    truth.attach_har_channels(scheme);
    const auto mask =
        a.mask.empty() ? make_interior_mask(truth) : load_mask_volume(a.mask, truth.voxel_count());
    const EvalReport r = evaluate(pred, truth, scheme, mask);
    save_eval_csv(r, a.out);
    std::printf("mean nrmse %.6g, fa rmse %.6g, md rmse %.6g, coverage %.6f\n", r.mean_nrmse,
                r.fa_rmse, r.md_rmse, r.coverage);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"q-space angular upsampling pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "qhex 1.0.0");

    GenSchemeArgs gs;
    auto* c_gs = app.add_subcommand("gen-scheme", "generate a nested gradient scheme");
    c_gs->add_option("--n-lar", gs.n_lar, "LAR direction count");
    c_gs->add_option("--n-har", gs.n_har, "HAR direction count");
    c_gs->add_option("--pool", gs.pool, "candidate pool size");
    c_gs->add_option("--seed", gs.seed, "pool jitter seed");
    c_gs->add_option("--bval", gs.bval, "b-value in s/mm^2");
    c_gs->add_option("-o,--out", gs.out, "output scheme file")->required();
    c_gs->callback([&] { cmd_gen_scheme(gs); });

    MakePhantomArgs mp;
    auto* c_mp = app.add_subcommand("make-phantom", "synthesize a tensor phantom");
    c_mp->add_option("--type", mp.type, "phantom type")
        ->check(CLI::IsMember({"mixed", "isotropic"}));
    c_mp->add_option("--scheme", mp.scheme, "scheme file")->required();
    c_mp->add_option("--out-har", mp.out_har, "HAR output dvol")->required();
    c_mp->add_option("--out-lar", mp.out_lar, "LAR output dvol")->required();
    c_mp->add_option("--out-regions", mp.out_regions, "region-label output dvol");
    c_mp->add_option("--nx", mp.nx);
    c_mp->add_option("--ny", mp.ny);
    c_mp->add_option("--nz", mp.nz);
    c_mp->add_option("--s0", mp.s0, "unweighted signal level");
    c_mp->add_option("--noise-sigma", mp.noise_sigma, "Rician noise sigma (signal units)");
    c_mp->add_option("--seed", mp.seed, "phantom/noise seed");
    c_mp->callback([&] { cmd_make_phantom(mp); });

    BuildDatasetArgs bd;
    auto* c_bd = app.add_subcommand("build-dataset", "extract training samples");
    c_bd->add_option("--lar", bd.lar, "LAR dvol")->required();
    c_bd->add_option("--har", bd.har, "HAR dvol")->required();
    c_bd->add_option("--scheme", bd.scheme, "scheme file")->required();
    c_bd->add_option("--out", bd.out, "output basename (.train.qhxd/.val.qhxd)")->required();
    c_bd->add_option("--regions", bd.regions, "region-label dvol for the split");
    c_bd->add_option("--mask", bd.mask, "mask dvol (default: interior voxels)");
    c_bd->add_option("--val-fraction", bd.val_fraction, "fraction of regions held out");
    c_bd->callback([&] { cmd_build_dataset(bd); });

    TrainArgs tr;
    auto* c_tr = app.add_subcommand("train", "train the regressor");
    c_tr->add_option("--dataset", tr.dataset, "dataset basename")->required();
    c_tr->add_option("--out-model", tr.out_model, "model output (.qhxm)")->required();
    c_tr->add_option("--out-log", tr.out_log, "per-iteration CSV log");
    c_tr->add_option("--config", tr.config, "training config JSON");
    c_tr->add_option("--seed", tr.seed, "init/shuffle seed");
    c_tr->add_option("--epochs", tr.epochs, "override epochs for every phase");
    c_tr->add_option("--batch-size", tr.batch_size, "override batch size for every phase");
    c_tr->callback([&] { cmd_train(tr); });

    UpsampleArgs up;
    auto* c_up = app.add_subcommand("upsample", "synthesize the HAR volume");
    c_up->add_option("--lar", up.lar, "LAR dvol")->required();
    c_up->add_option("--scheme", up.scheme, "scheme file")->required();
    c_up->add_option("--model", up.model, "trained model (.qhxm)");
    c_up->add_flag("--baseline", up.baseline, "barycentric baseline instead of the model");
    c_up->add_option("--out", up.out, "output dvol")->required();
    c_up->add_option("--mask", up.mask, "mask dvol (default: interior voxels)");
    c_up->callback([&] {
        const bool have_model = !up.model.empty();
        if (have_model == up.baseline)
            throw CLI::ValidationError("upsample", "exactly one of --model/--baseline required");
        cmd_upsample(up);
    });

    FitDtiArgs fd;
    auto* c_fd = app.add_subcommand("fit-dti", "fit tensors, write FA/MD maps");
    c_fd->add_option("--vol", fd.vol, "input dvol")->required();
    c_fd->add_option("--out-fa", fd.out_fa, "FA map dvol")->required();
    c_fd->add_option("--out-md", fd.out_md, "MD map dvol")->required();
    c_fd->add_option("--mask", fd.mask, "mask dvol (default: positive signals)");
    c_fd->callback([&] { cmd_fit_dti(fd); });

    EvaluateArgs ev;
    auto* c_ev = app.add_subcommand("evaluate", "compare a predicted volume to ground truth");
    c_ev->add_option("--pred", ev.pred, "predicted dvol")->required();
    c_ev->add_option("--truth", ev.truth, "ground-truth dvol")->required();
    c_ev->add_option("--scheme", ev.scheme, "scheme file")->required();
    c_ev->add_option("--out", ev.out, "metrics CSV")->required();
    c_ev->add_option("--mask", ev.mask, "mask dvol (default: interior voxels)");
    c_ev->callback([&] { cmd_evaluate(ev); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const DivergedError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

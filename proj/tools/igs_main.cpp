// igs: encode images as optimized 2D Gaussian sets, decode them at any
// resolution, and inspect/benchmark the serialized representation.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "igs/bsp.hpp"
#include "igs/codec.hpp"
#include "igs/error.hpp"
#include "igs/fit.hpp"
#include "igs/metrics.hpp"
#include "igs/png_io.hpp"
#include "igs/renderer.hpp"

namespace {

// Exit codes: 0 ok, 2 usage, 3 I/O, 4 bad file format, 5 computation failure.
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitFormat = 4;
constexpr int kExitCompute = 5;

int exit_code_for(const igs::Error& e) {
    switch (e.kind()) {
        case igs::ErrorKind::io:
            return kExitIo;
        case igs::ErrorKind::bad_magic:
        case igs::ErrorKind::bad_version:
        case igs::ErrorKind::truncated:
        case igs::ErrorKind::unsupported_format:
        case igs::ErrorKind::empty_set:
            return kExitFormat;
        default:
            return kExitCompute;
    }
}

struct EncodeArgs {
    std::string input, output, lod_dir, report;
    int gaussians = 0;
    int iters = 50000;
    int k = 10;
    double lambda_init = 0.3;
    double lambda_opt = 0.8;
    int samples = 10000;
    uint64_t seed = 0;
    int nmax = 64;
    int warmup = 10000;
    int densify_interval = 5000;
    int eval_interval = 1000;
};

int run_encode(const EncodeArgs& a) {
    const igs::ImageBuffer target = igs::load_image(a.input);

    igs::FitConfig config;
    config.budget = a.gaussians;
    config.k = a.k;
    config.lambda_init = a.lambda_init;
    config.lambda_opt = a.lambda_opt;
    config.iterations = a.iters;
    config.samples_per_iter = a.samples;
    config.seed = a.seed;
    config.warmup_iters = a.warmup;
    config.densify_interval = a.densify_interval;
    config.eval_interval = a.eval_interval;

    igs::CheckpointFn on_checkpoint;
    if (!a.lod_dir.empty()) {
        std::filesystem::create_directories(a.lod_dir);
        on_checkpoint = [&](int, int, const std::string& id, const igs::GaussianSet& set) {
            std::vector<uint8_t> bytes;
            if (a.nmax > 0) {
                const igs::BspPartition p = igs::build_partition(set, a.nmax);
                bytes = igs::encode(set, &p, target.width(), target.height(), a.k);
            } else {
                bytes = igs::encode(set, nullptr, target.width(), target.height(), a.k);
            }
            igs::write_file((std::filesystem::path(a.lod_dir) / (id + ".igs2")).string(), bytes);
        };
    }

    auto [set, fit_report] = igs::fit(target, config, on_checkpoint);

    std::vector<uint8_t> bytes;
    if (a.nmax > 0) {
        const igs::BspPartition partition = igs::build_partition(set, a.nmax);
        bytes = igs::encode(set, &partition, target.width(), target.height(), a.k);
    } else {
        bytes = igs::encode(set, nullptr, target.width(), target.height(), a.k);
    }
    igs::write_file(a.output, bytes);

    if (!a.report.empty()) {
        std::ofstream rf(a.report, std::ios::trunc);
        if (!rf) igs::raise(igs::ErrorKind::io, "cannot create " + a.report);
        fit_report.write(rf, config);
    }

    const igs::SizeReport sr = igs::size_report(static_cast<uint32_t>(set.size()),
                                                a.nmax > 0 ? 1 : 0, target.width(), target.height());
    std::fprintf(stderr, "encoded %zu Gaussians (%llu payload bytes) -> %s\n", set.size(),
                 static_cast<unsigned long long>(sr.payload_bytes), a.output.c_str());
    return 0;
}

int run_decode(const std::string& input, const std::string& output, int width, int height, bool no_accel) {
    const igs::Decoded d = igs::decode(igs::read_file(input));
    const int W = width > 0 ? width : static_cast<int>(d.width);
    const int H = height > 0 ? height : static_cast<int>(d.height);

    igs::ImageBuffer img = (d.partition && !no_accel)
                               ? igs::render_image_blocked(d.set, *d.partition, W, H, d.k)
                               : igs::render_image(d.set, W, H, d.k);
    igs::save_image(img, output);
    return 0;
}

int run_info(const std::string& input) {
    const std::vector<uint8_t> bytes = igs::read_file(input);
    const igs::Decoded d = igs::decode(bytes);
    const uint32_t n_b = d.partition ? static_cast<uint32_t>(d.partition->block_count()) : 0;
    const igs::SizeReport sr = igs::size_report(static_cast<uint32_t>(d.set.size()), n_b, d.width, d.height);

    std::printf("magic IGS2 version 1\n");
    std::printf("width %u height %u k %d\n", d.width, d.height, d.k);
    std::printf("gaussians %zu blocks %u\n", d.set.size(), n_b);
    std::printf("payload bytes %llu\n", static_cast<unsigned long long>(sr.payload_bytes));
    std::printf("block bytes %llu\n", static_cast<unsigned long long>(sr.block_bytes));
    std::printf("header bytes %llu\n", static_cast<unsigned long long>(sr.header_bytes));
    std::printf("file bytes %zu\n", bytes.size());
    std::printf("bpp %.3f\n", sr.bpp);
    return 0;
}

int run_metrics(const std::string& ref, const std::string& test) {
    const igs::ImageBuffer a = igs::load_image(ref);
    const igs::ImageBuffer b = igs::load_image(test);
    const double p = igs::psnr(a, b);
    const double s = igs::ssim(a, b);
    std::printf("PSNR %.4f, SSIM %.6f\n", p, s);
    return 0;
}

int run_bench(const std::string& input, int pixels, const std::string& nmax_list) {
    const igs::Decoded d = igs::decode(igs::read_file(input));

    std::vector<int> nmax_values;
    std::stringstream ss(nmax_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const int v = std::stoi(tok);
        if (v < 1) igs::raise(igs::ErrorKind::invalid_parameter, "n_max values must be >= 1");
        nmax_values.push_back(v);
    }
    if (nmax_values.empty()) igs::raise(igs::ErrorKind::invalid_parameter, "empty n_max list");

    const igs::BenchResult r = igs::bench_render(d.set, pixels, nmax_values, /*seed=*/1234);

    std::printf("%8s %6s %14s %12s %18s %10s\n", "n_max", "N_b", "mean ms/10k px", "std ms",
                "candidates/pixel", "speedup");
    std::printf("%8s %6s %14.4f %12.4f %18.1f %9.2fx\n", "none", "-", r.baseline.mean_ms_per_10k,
                r.baseline.std_ms, r.baseline.mean_candidates, 1.0);
    for (const igs::BenchRow& row : r.rows)
        std::printf("%8d %6d %14.4f %12.4f %18.1f %9.2fx\n", row.n_max, row.n_b, row.mean_ms_per_10k,
                    row.std_ms, row.mean_candidates, r.baseline.mean_ms_per_10k / row.mean_ms_per_10k);
    return 0;
}

int run_lod(const std::string& dir, bool check_render) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) igs::raise(igs::ErrorKind::io, dir + " is not a directory");

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".igs2") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) igs::raise(igs::ErrorKind::io, "no .igs2 checkpoints in " + dir);

    std::printf("%-40s %10s %8s %12s %8s\n", "checkpoint", "gaussians", "blocks", "payload B", "bpp");
    for (const auto& f : files) {
        const igs::Decoded d = igs::decode(igs::read_file(f.string()));
        const uint32_t n_b = d.partition ? static_cast<uint32_t>(d.partition->block_count()) : 0;
        const igs::SizeReport sr =
            igs::size_report(static_cast<uint32_t>(d.set.size()), n_b, d.width, d.height);
        std::printf("%-40s %10zu %8u %12llu %8.3f\n", f.filename().string().c_str(), d.set.size(), n_b,
                    static_cast<unsigned long long>(sr.payload_bytes), sr.bpp);
        if (check_render) {
            const igs::ImageBuffer img = d.partition ? igs::render_image_blocked(d.set, *d.partition, 32, 32, d.k)
                                                     : igs::render_image(d.set, 32, 32, d.k);
            (void)img;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"image codec based on optimized anisotropic 2D Gaussians"};
    app.require_subcommand(1);

    EncodeArgs ea;
    CLI::App* enc = app.add_subcommand("encode", "fit an image and write an .igs2 file");
    enc->add_option("--input", ea.input, "input PNG")->required();
    enc->add_option("--output", ea.output, "output .igs2 path")->required();
    enc->add_option("--gaussians", ea.gaussians, "Gaussian budget (>= 8)")->required();
    enc->add_option("--iters", ea.iters, "optimization iterations");
    enc->add_option("--k", ea.k, "top-k blend size");
    enc->add_option("--lambda-init", ea.lambda_init, "uniform mixture weight for initialization sampling");
    enc->add_option("--lambda-opt", ea.lambda_opt, "uniform mixture weight for training sampling");
    enc->add_option("--samples", ea.samples, "pixel samples per iteration");
    enc->add_option("--seed", ea.seed, "RNG seed");
    enc->add_option("--nmax", ea.nmax, "max Gaussians per BSP block (0 = no partition)");
    enc->add_option("--lod-dir", ea.lod_dir, "directory for per-stage LoD checkpoints");
    enc->add_option("--report", ea.report, "fit report log path");
    enc->add_option("--warmup", ea.warmup, "iterations before the first densification");
    enc->add_option("--densify-interval", ea.densify_interval, "iterations between densifications");
    enc->add_option("--eval-interval", ea.eval_interval, "iterations between metric evaluations");

    std::string dec_input, dec_output;
    int dec_width = 0, dec_height = 0;
    bool dec_no_accel = false;
    CLI::App* dec = app.add_subcommand("decode", "render an .igs2 file to PNG");
    dec->add_option("--input", dec_input, "input .igs2")->required();
    dec->add_option("--output", dec_output, "output PNG")->required();
    dec->add_option("--width", dec_width, "render width (default: stored width)");
    dec->add_option("--height", dec_height, "render height (default: stored height)");
    dec->add_flag("--no-accel", dec_no_accel, "ignore stored blocks, use the global renderer");

    std::string info_input;
    CLI::App* info = app.add_subcommand("info", "print header and size accounting");
    info->add_option("--input", info_input, "input .igs2")->required();

    std::string met_ref, met_test;
    CLI::App* met = app.add_subcommand("metrics", "PSNR/SSIM between two PNGs");
    met->add_option("--ref", met_ref, "reference PNG")->required();
    met->add_option("--test", met_test, "test PNG")->required();

    std::string bench_input, bench_nmax = "1024,256,128,64,43";
    int bench_pixels = 10000;
    CLI::App* ben = app.add_subcommand("bench", "blocked-renderer latency sweep");
    ben->add_option("--input", bench_input, "input .igs2")->required();
    ben->add_option("--pixels", bench_pixels, "random pixels per trial");
    ben->add_option("--nmax-list", bench_nmax, "comma-separated n_max values");

    std::string lod_dir;
    bool lod_check = false;
    CLI::App* lod = app.add_subcommand("lod", "inspect a directory of LoD checkpoints");
    lod->add_option("--dir", lod_dir, "checkpoint directory")->required();
    lod->add_flag("--check", lod_check, "also test-render each checkpoint");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (enc->parsed()) return run_encode(ea);
        if (dec->parsed()) return run_decode(dec_input, dec_output, dec_width, dec_height, dec_no_accel);
        if (info->parsed()) return run_info(info_input);
        if (met->parsed()) return run_metrics(met_ref, met_test);
        if (ben->parsed()) return run_bench(bench_input, bench_pixels, bench_nmax);
        if (lod->parsed()) return run_lod(lod_dir, lod_check);
    } catch (const igs::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCompute;
    }
    return kExitUsage;
}

#include "mssr/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <ostream>

#include "mssr/dataset.hpp"
#include "mssr/errors.hpp"
#include "mssr/evaluate.hpp"
#include "mssr/gradcheck.hpp"
#include "mssr/image_io.hpp"
#include "mssr/model_io.hpp"
#include "mssr/sample_store.hpp"
#include "mssr/trainer.hpp"

namespace mssr {

namespace fs = std::filesystem;

namespace {

struct PrepareArgs {
    std::vector<std::string> dirs;
    std::string out;
    std::vector<int> scales = {2, 3, 4};
    std::size_t patch = 41;
    bool no_augment = false;
    bool no_rotate = false;
    bool no_downscale = false;
    std::uint64_t seed = 0;
};

struct TrainArgs {
    std::string store;
    std::string out;
    std::string init;
    ModelConfig model;
    TrainConfig train;
    std::size_t lr_drop_epoch = 0;  // 0: min(80, epochs)
    int precision = 32;
    bool no_timing = false;
};

struct InferArgs {
    std::string model;
    std::string input;
    std::string output;
    int scale = 3;
};

struct EvaluateArgs {
    std::string model;
    std::string benchmark;
    std::string out;
    int scale = 3;
    bool no_timing = false;
};

struct GradCheckArgs {
    std::uint64_t seed = 1;
    std::string inject = "none";
    std::size_t width = 8;
    std::size_t size = 7;
    std::size_t max_coords = 0;
};

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

int cmd_prepare_data(const PrepareArgs& a, std::ostream& out, std::ostream& err) {
    for (const auto& d : a.dirs) {
        if (!fs::is_directory(d)) {
            err << "error: input directory not found: " << d << '\n';
            return kExitUsageOrIo;
        }
    }
    AugmentSpec aug;
    aug.rotate = !(a.no_augment || a.no_rotate);
    aug.downscale = !(a.no_augment || a.no_downscale);
    aug.min_side = a.patch;
    PairSpec pairs;
    pairs.scales = a.scales;
    pairs.patch_size = a.patch;
    pairs.stride = a.patch;

    std::vector<fs::path> dirs(a.dirs.begin(), a.dirs.end());
    const auto report = build_training_set(dirs, aug, pairs, a.seed, a.out, &err);
    out << "images: " << report.images_used << " used of " << report.images_found << " (" << report.warnings
        << " warnings)\n";
    out << "samples: " << report.total_samples << '\n';
    for (const auto& [scale, n] : report.samples_per_scale) {
        out << "  scale " << scale << ": " << n << '\n';
    }
    out << "store: " << a.out << '\n';
    return kExitOk;
}

template <typename T>
int run_training(const TrainArgs& a, const std::vector<TrainSample>& samples, std::ostream& out) {
    MssrModel<T> model(a.model);
    if (!a.init.empty()) {
        MssrModel<float> loaded = load_model(a.init);
        if (!(loaded.config == a.model)) {
            throw ArgumentError("--init model architecture differs from the requested one");
        }
        if constexpr (std::is_same_v<T, float>) {
            model = std::move(loaded);
        } else {
            model = loaded.cast<double>();
        }
    } else {
        init_he(model, a.train.seed);
    }
    const auto report = train(model, samples, a.train, a.out, &out);
    for (const auto& [scale, loss] : report.final_loss_by_scale) {
        out << "final loss x" << scale << ": " << loss << '\n';
    }
    out << "checkpoint: " << checkpoint_path(a.out, a.train.total_epochs).string() << '\n';
    return kExitOk;
}

int cmd_train(TrainArgs a, std::ostream& out, std::ostream&) {
    a.train.lr_drop_epoch = a.lr_drop_epoch != 0 ? a.lr_drop_epoch : std::min<std::size_t>(80, a.train.total_epochs);
    a.train.record_timing = !a.no_timing;
    a.model.validate();
    a.train.validate();
    if (a.precision != 32 && a.precision != 64) {
        throw ArgumentError("--precision must be 32 or 64");
    }
    const SampleStore store = read_sample_store(a.store);
    if (store.samples.empty()) {
        throw ArgumentError("sample store " + a.store + " is empty");
    }
    MssrModel<float> probe(a.model);
    out << "MSSR training: N_L=" << a.model.n_long << " N_S=" << a.model.n_short << " N_r=" << a.model.n_recon
        << " width=" << a.model.width << " params=" << parameter_count(probe) << '\n';
    out << "Adam: lr=" << format_double(a.train.initial_lr) << " (x0.1 from epoch " << a.train.lr_drop_epoch + 1
        << ") batch=" << a.train.batch_size << " beta1=" << format_double(a.train.beta1)
        << " beta2=" << format_double(a.train.beta2) << " eps=" << format_double(a.train.epsilon)
        << " weight_decay=" << format_double(a.train.weight_decay) << " epochs=" << a.train.total_epochs
        << " seed=" << a.train.seed << " precision=" << a.precision << "-bit\n";
    out << "samples: " << store.samples.size() << '\n';
    return a.precision == 64 ? run_training<double>(a, store.samples, out)
                             : run_training<float>(a, store.samples, out);
}

int cmd_infer(const InferArgs& a, std::ostream& out, std::ostream&) {
    const MssrModel<float> model = load_model(a.model);
    const Image lr = read_image(a.input);
    const Image hr = super_resolve(model, lr, a.scale);
    write_image(a.output, hr);
    out << "wrote " << a.output << '\n';
    return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
    const MssrModel<float> model = load_model(a.model);
    const auto pairs = load_benchmark(a.benchmark, a.scale, &err);
    const auto result = evaluate_pairs(model, pairs, a.scale, !a.no_timing);
    if (!a.out.empty()) {
        write_eval_csv(a.out, result);
    }
    out << kEvalCsvHeader << '\n';
    for (const auto& row : result.rows) {
        out << format_eval_row(row) << '\n';
    }
    out << format_eval_row(result.average) << '\n';
    return kExitOk;
}

int cmd_grad_check(const GradCheckArgs& a, std::ostream& out, std::ostream&) {
    GradCheckOptions opt;
    opt.seed = a.seed;
    opt.model.width = a.width;
    opt.input_size = a.size;
    opt.max_coords_per_layer = a.max_coords;
    if (a.inject == "bias") {
        opt.inject = InjectedBug::bias;
    } else if (a.inject == "weight") {
        opt.inject = InjectedBug::weight;
    }
    const auto report = run_grad_check(opt);
    for (const auto& e : report.entries) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-12s %-22s max_rel_err=%.3e checked=%zu skipped=%zu %s", e.suite.c_str(),
                      e.name.c_str(), e.max_rel_error, e.checked, e.skipped,
                      e.max_rel_error < report.tolerance ? "ok" : "FAIL");
        out << line << '\n';
    }
    out << (report.passed() ? "PASS" : "FAIL") << " worst=" << report.worst()
        << " tolerance=" << format_double(report.tolerance) << '\n';
    return report.passed() ? kExitOk : kExitVerificationFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-scale super-resolution network: data preparation, training, inference and evaluation",
                 "mssr"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    PrepareArgs prep;
    auto* prepare = app.add_subcommand("prepare-data", "Build a multi-scale training sample store from HR images");
    prepare->add_option("dirs", prep.dirs, "Directories of HR training images")->required();
    prepare->add_option("-o,--out", prep.out, "Output sample store directory")->required();
    prepare->add_option("--scales", prep.scales, "Up-scale factors to pair")->delimiter(',')->check(CLI::Range(2, 4));
    prepare->add_option("--patch", prep.patch, "Patch side (also the tiling stride)")->check(CLI::PositiveNumber);
    prepare->add_flag("--no-augment", prep.no_augment, "Disable rotation and downscale augmentation");
    prepare->add_flag("--no-rotate", prep.no_rotate, "Disable the 90/180/270 degree rotations");
    prepare->add_flag("--no-downscale", prep.no_downscale, "Disable the 0.9/0.8/0.7/0.6 downscales");
    prepare->add_option("--seed", prep.seed, "Seed recorded in the store manifest");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Train a model on a sample store");
    train_cmd->add_option("--store", tr.store, "Sample store directory from prepare-data")->required();
    train_cmd->add_option("-o,--out", tr.out, "Directory for checkpoints and train_log.csv")->required();
    train_cmd->add_option("--init", tr.init, "Start from this model file instead of He initialization");
    train_cmd->add_option("--epochs", tr.train.total_epochs, "Training epochs")->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch", tr.train.batch_size, "Batch size")->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", tr.train.initial_lr, "Initial learning rate");
    train_cmd->add_option("--lr-drop-epoch", tr.lr_drop_epoch,
                          "Epoch from which the learning rate is divided by 10 (0: min(80, epochs))");
    train_cmd->add_option("--beta1", tr.train.beta1, "Adam beta1 (momentum)");
    train_cmd->add_option("--beta2", tr.train.beta2, "Adam beta2");
    train_cmd->add_option("--eps", tr.train.epsilon, "Adam epsilon");
    train_cmd->add_option("--weight-decay", tr.train.weight_decay, "L2 weight decay added to the gradient");
    train_cmd->add_option("--n-long", tr.model.n_long, "Layers per fusion block (long path)");
    train_cmd->add_option("--n-short", tr.model.n_short, "Layers on the short path (shared prefix)");
    train_cmd->add_option("--n-recon", tr.model.n_recon, "Reconstruction layers");
    train_cmd->add_option("--width", tr.model.width, "Filters per hidden layer")->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", tr.train.seed, "Seed for initialization and shuffling");
    train_cmd->add_option("--micro-batch", tr.train.micro_batch, "Samples per forward/backward pass")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--precision", tr.precision, "Arithmetic precision in bits (32 or 64)");
    train_cmd->add_flag("--no-timing", tr.no_timing, "Write 0 in the seconds column of the log");

    InferArgs inf;
    auto* infer = app.add_subcommand("infer", "Upscale one image");
    infer->add_option("-m,--model", inf.model, "Model file")->required();
    infer->add_option("-i,--input", inf.input, "Low-resolution input image (PNG/PGM/PPM)")->required();
    infer->add_option("-o,--output", inf.output, "Output image (.png, .pgm, .ppm)")->required();
    infer->add_option("-s,--scale", inf.scale, "Up-scale factor")->check(CLI::Range(2, 4));

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "PSNR/SSIM of a model and bicubic on a benchmark folder");
    evaluate->add_option("-m,--model", ev.model, "Model file")->required();
    evaluate->add_option("-b,--benchmark", ev.benchmark, "Directory of HR benchmark images")->required();
    evaluate->add_option("-s,--scale", ev.scale, "Up-scale factor")->check(CLI::Range(2, 4));
    evaluate->add_option("-o,--out", ev.out, "CSV output path");
    evaluate->add_flag("--no-timing", ev.no_timing, "Skip timing runs; seconds column is 0");

    GradCheckArgs gc;
    auto* grad_check = app.add_subcommand("grad-check", "Finite-difference check of all analytic gradients");
    grad_check->add_option("--seed", gc.seed, "Seed for the random toy problems");
    grad_check->add_option("--inject-bug", gc.inject, "Corrupt one analytic gradient (harness self-test)")
        ->check(CLI::IsMember({"none", "bias", "weight"}));
    grad_check->add_option("--width", gc.width, "Model width of the toy network")->check(CLI::PositiveNumber);
    grad_check->add_option("--size", gc.size, "Side of the toy input image")->check(CLI::Range(2, 64));
    grad_check->add_option("--max-coords", gc.max_coords, "Parameters sampled per layer (0: all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsageOrIo;
    }

    try {
        if (*prepare) return cmd_prepare_data(prep, out, err);
        if (*train_cmd) return cmd_train(tr, out, err);
        if (*infer) return cmd_infer(inf, out, err);
        if (*evaluate) return cmd_evaluate(ev, out, err);
        if (*grad_check) return cmd_grad_check(gc, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsageOrIo;
    }
    return kExitUsageOrIo;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.push_back("mssr");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace mssr

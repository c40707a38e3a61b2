#include "cli.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "bdc/checkpoint.hpp"
#include "bdc/dcov.hpp"
#include "bdc/errors.hpp"
#include "bdc/pipeline.hpp"
#include "bdc/report.hpp"
#include "bdc/synthetic.hpp"
#include "json.hpp"

namespace bdc::cli {
namespace {

using nlohmann::json;

struct DataOptions {
    std::string bank;
    std::string manifest;
};

struct PipelineOptions {
    std::size_t shots = 8;
    std::size_t proj_dim = 64;
    std::string proj_kind = "random-orthogonal";
    std::string axis = "channels";
    std::uint64_t seed = 0;
};

struct TrainOptions {
    std::size_t epochs = 30;
    double lr = 1e-3;
    double wd = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::optional<std::size_t> image_batch;
    std::optional<std::size_t> text_batch;
    bool no_text_init = false;
};

struct FusionOptions {
    std::optional<double> alpha;
    std::optional<double> delta;
    std::optional<double> tau;
};

void add_data(CLI::App* cmd, DataOptions& o, bool manifest = true) {
    cmd->add_option("--bank", o.bank, "Feature bank file")->required();
    if (manifest) cmd->add_option("--manifest", o.manifest, "Manifest JSON file")->required();
}

void add_pipeline(CLI::App* cmd, PipelineOptions& o) {
    cmd->add_option("--shots", o.shots, "Support items per class (M)")->capture_default_str();
    cmd->add_option("--proj-dim", o.proj_dim, "Reduced channel count, clamped to the map channels")
        ->capture_default_str();
    cmd->add_option("--proj-kind", o.proj_kind, "random-orthogonal | pca | identity (used whenever proj-dim >= channels)")->capture_default_str();
    cmd->add_option("--axis", o.axis, "BDC observations: channels | positions")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Master seed")->capture_default_str();
}

void add_train(CLI::App* cmd, TrainOptions& o) {
    cmd->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--lr", o.lr, "Initial learning rate")->capture_default_str();
    cmd->add_option("--wd", o.wd, "Decoupled weight decay")->capture_default_str();
    cmd->add_option("--beta1", o.beta1)->capture_default_str();
    cmd->add_option("--beta2", o.beta2)->capture_default_str();
    cmd->add_option("--eps", o.eps)->capture_default_str();
    cmd->add_option("--image-batch", o.image_batch, "Image samples per step (default: shots)");
    cmd->add_option("--text-batch", o.text_batch, "Text samples per step (default: classes)");
    cmd->add_flag("--no-text-init", o.no_text_init, "Random head initialization");
}

void add_fusion(CLI::App* cmd, FusionOptions& o) {
    cmd->add_option("--alpha", o.alpha, "Residual ratio on prototype scores");
    cmd->add_option("--delta", o.delta, "Prototype score sharpness");
    cmd->add_option("--tau", o.tau, "Zero-shot softmax temperature");
}

FusionConfig resolve_fusion(const FusionOptions& o, FusionConfig base) {
    if (o.alpha) base.alpha = *o.alpha;
    if (o.delta) base.delta = *o.delta;
    if (o.tau) base.tau = *o.tau;
    if (!(base.alpha >= 0.0)) throw std::invalid_argument("--alpha must be >= 0");
    if (!(base.delta > 0.0)) throw std::invalid_argument("--delta must be > 0");
    if (!(base.tau > 0.0)) throw std::invalid_argument("--tau must be > 0");
    return base;
}

PipelineConfig resolve_pipeline(const PipelineOptions& p, const TrainOptions& t,
                                const FusionOptions& f) {
    PipelineConfig cfg;
    cfg.shots = p.shots;
    cfg.proj_dim = p.proj_dim;
    cfg.proj_kind = parse_projection_kind(p.proj_kind);
    cfg.axis = parse_observation_axis(p.axis);
    cfg.seed = p.seed;
    cfg.train.epochs = t.epochs;
    cfg.train.base_lr = t.lr;
    cfg.train.weight_decay = t.wd;
    cfg.train.beta1 = t.beta1;
    cfg.train.beta2 = t.beta2;
    cfg.train.epsilon = t.eps;
    cfg.train.image_batch = t.image_batch.value_or(p.shots);
    cfg.train.text_batch = t.text_batch;
    cfg.text_init = !t.no_text_init;
    cfg.fusion = resolve_fusion(f, FusionConfig{});
    return cfg;
}

// Echoes the projection that will actually be fitted for a bank with `channels` rows per map.
json to_json(const PipelineConfig& c, std::size_t classes, std::size_t channels) {
    const std::size_t dim = std::min(c.proj_dim, channels);
    return {
        {"shots", c.shots},
        {"proj_dim", dim},
        {"proj_kind", to_string(dim == channels ? ProjectionKind::identity : c.proj_kind)},
        {"axis", to_string(c.axis)},
        {"seed", c.seed},
        {"episode_seed", c.episode_seed()},
        {"train_seed", c.train_seed()},
        {"epochs", c.train.epochs},
        {"lr", c.train.base_lr},
        {"weight_decay", c.train.weight_decay},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"eps", c.train.epsilon},
        {"image_batch", c.train.image_batch},
        {"text_batch", c.train.text_batch.value_or(classes)},
        {"text_init", c.text_init},
        {"alpha", c.fusion.alpha},
        {"delta", c.fusion.delta},
        {"tau", c.fusion.tau},
    };
}

json to_json(const FusionConfig& f) {
    return {{"alpha", f.alpha}, {"delta", f.delta}, {"tau", f.tau}};
}

void echo_config(std::ostream& out, const std::string& command, json cfg) {
    cfg["command"] = command;
    out << "config " << cfg.dump() << "\n";
}

std::vector<std::size_t> parse_channels(const std::vector<std::size_t>& list, std::size_t rows,
                                        const char* flag) {
    if (list.empty()) throw std::invalid_argument(std::string(flag) + " needs at least one channel");
    for (std::size_t c : list)
        if (c >= rows)
            throw DataError(std::string(flag) + " channel " + std::to_string(c) +
                            " out of range for " + std::to_string(rows) + " channels");
    return list;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"BDC-Adapter few-shot toolkit: BDC prototypes, reasoning head, fused inference"};
    app.require_subcommand(1);

    // gen
    SynthSpec synth;
    std::string gen_bank, gen_manifest;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dependence-structured bank");
    gen->add_option("--out-bank", gen_bank)->required();
    gen->add_option("--out-manifest", gen_manifest)->required();
    gen->add_option("--classes", synth.classes)->capture_default_str();
    gen->add_option("--shots", synth.shots, "Train items per class")->capture_default_str();
    gen->add_option("--queries", synth.queries, "Test items")->capture_default_str();
    gen->add_option("--val-queries", synth.val_queries, "Validation items")->capture_default_str();
    gen->add_option("--channels", synth.channels)->capture_default_str();
    gen->add_option("--positions", synth.positions)->capture_default_str();
    gen->add_option("--noise", synth.noise)->capture_default_str();
    gen->add_option("--signal", synth.embedding_signal, "Class offset in the global embedding")
        ->capture_default_str();
    gen->add_option("--seed", synth.seed)->capture_default_str();

    // prototypes
    DataOptions proto_data;
    PipelineOptions proto_pipe;
    std::string proto_out;
    auto* protos = app.add_subcommand("prototypes", "Build class BDC prototypes from a bank");
    add_data(protos, proto_data);
    add_pipeline(protos, proto_pipe);
    protos->add_option("--out", proto_out)->required();

    // train
    DataOptions train_data;
    PipelineOptions train_pipe;
    TrainOptions train_opts;
    FusionOptions train_fusion;
    std::string train_out, train_protos;
    auto* train_cmd = app.add_subcommand("train", "Train the reasoning head and write a checkpoint");
    add_data(train_cmd, train_data);
    add_pipeline(train_cmd, train_pipe);
    add_train(train_cmd, train_opts);
    add_fusion(train_cmd, train_fusion);
    train_cmd->add_option("--prototypes", train_protos, "Reuse this file's projection");
    train_cmd->add_option("--out", train_out)->required();

    // eval
    DataOptions eval_data;
    FusionOptions eval_fusion;
    std::string eval_ckpt, eval_protos, eval_out, eval_split = "test";
    unsigned eval_workers = 1;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint and write a report");
    add_data(eval_cmd, eval_data);
    add_fusion(eval_cmd, eval_fusion);
    eval_cmd->add_option("--checkpoint", eval_ckpt)->required();
    eval_cmd->add_option("--prototypes", eval_protos);
    eval_cmd->add_option("--split", eval_split)->capture_default_str();
    eval_cmd->add_option("--workers", eval_workers)->capture_default_str();
    eval_cmd->add_option("--out", eval_out, "Report file (line-delimited JSON)");

    // dcov
    DataOptions dcov_data;
    std::vector<std::size_t> dcov_x, dcov_y;
    std::optional<std::size_t> dcov_label;
    std::string dcov_split;
    std::size_t dcov_max = 2000;
    auto* dcov_cmd = app.add_subcommand("dcov", "Distance covariance between two channel sets");
    add_data(dcov_cmd, dcov_data, false);
    dcov_cmd->add_option("--manifest", dcov_data.manifest, "Needed with --split");
    dcov_cmd->add_option("--x", dcov_x, "Channels of the first variable")->delimiter(',')->required();
    dcov_cmd->add_option("--y", dcov_y, "Channels of the second variable")->delimiter(',')->required();
    dcov_cmd->add_option("--label", dcov_label, "Only items of this class");
    dcov_cmd->add_option("--split", dcov_split, "Only items of this split");
    dcov_cmd->add_option("--max-samples", dcov_max)->capture_default_str();

    // grid
    DataOptions grid_data;
    std::vector<double> grid_alphas{0.0, 0.5, 1.0, 2.0, 4.0};
    std::vector<double> grid_deltas{0.5, 1.0, 2.0, 4.0};
    std::string grid_ckpt, grid_out, grid_split = "val";
    std::optional<double> grid_tau;
    auto* grid_cmd = app.add_subcommand("grid", "Grid-search alpha and delta on a split");
    add_data(grid_cmd, grid_data);
    grid_cmd->add_option("--checkpoint", grid_ckpt)->required();
    grid_cmd->add_option("--alphas", grid_alphas)->delimiter(',')->capture_default_str();
    grid_cmd->add_option("--deltas", grid_deltas)->delimiter(',')->capture_default_str();
    grid_cmd->add_option("--tau", grid_tau);
    grid_cmd->add_option("--split", grid_split)->capture_default_str();
    grid_cmd->add_option("--out", grid_out);

    // ablate
    DataOptions abl_data;
    PipelineOptions abl_pipe;
    TrainOptions abl_train;
    FusionOptions abl_fusion;
    std::string abl_out, abl_split = "test";
    auto* abl_cmd = app.add_subcommand("ablate", "Component ablation: MRN w/o init, MRN w/ init, MRN + BDC");
    add_data(abl_cmd, abl_data);
    add_pipeline(abl_cmd, abl_pipe);
    add_train(abl_cmd, abl_train);
    add_fusion(abl_cmd, abl_fusion);
    abl_cmd->add_option("--split", abl_split)->capture_default_str();
    abl_cmd->add_option("--out", abl_out);

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.push_back("bdcadapt");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error: exit=1 kind=usage msg=" << msg << "\n";
        return usage_error;
    }

    try {
        if (*gen) {
            echo_config(out, "gen",
                        {{"classes", synth.classes}, {"shots", synth.shots}, {"queries", synth.queries},
                         {"val_queries", synth.val_queries}, {"channels", synth.channels},
                         {"positions", synth.positions}, {"noise", synth.noise},
                         {"signal", synth.embedding_signal}, {"seed", synth.seed}});
            const SyntheticData data = generate_synthetic(synth);
            write_bank(gen_bank, data.bank);
            write_manifest(gen_manifest, data.manifest);
            out << "wrote " << data.bank.items.size() << " items to " << gen_bank << "\n";
            return ok;
        }

        if (*protos) {
            const FeatureBank bank = read_bank(proto_data.bank);
            const Manifest manifest = read_manifest(proto_data.manifest);
            const PipelineConfig cfg = resolve_pipeline(proto_pipe, TrainOptions{}, FusionOptions{});
            echo_config(out, "prototypes", to_json(cfg, manifest.classes.size(), bank.map_rows));
            const PrototypeFile file = build_prototype_file(bank, manifest, cfg);
            save_prototypes(proto_out, file);
            out << "wrote " << file.prototypes.num_classes() << " prototypes of side "
                << file.prototypes.side << " to " << proto_out << "\n";
            return ok;
        }

        if (*train_cmd) {
            const FeatureBank bank = read_bank(train_data.bank);
            const Manifest manifest = read_manifest(train_data.manifest);
            const PipelineConfig cfg = resolve_pipeline(train_pipe, train_opts, train_fusion);
            echo_config(out, "train", to_json(cfg, manifest.classes.size(), bank.map_rows));
            std::optional<PrototypeFile> pf;
            if (!train_protos.empty()) pf = load_prototypes(train_protos);
            const TrainOutcome res =
                train_checkpoint(bank, manifest, cfg, pf ? &pf->projection : nullptr);
            save_checkpoint(train_out, res.checkpoint);
            out << "loss " << json(res.epoch_loss).dump() << "\n";
            out << "wrote checkpoint to " << train_out << "\n";
            return ok;
        }

        if (*eval_cmd) {
            const FeatureBank bank = read_bank(eval_data.bank);
            const Manifest manifest = read_manifest(eval_data.manifest);
            const Checkpoint ckpt = load_checkpoint(eval_ckpt);
            const FusionConfig fusion = resolve_fusion(eval_fusion, ckpt.fusion);
            const Split split = parse_split(eval_split);
            json cfg = to_json(fusion);
            cfg["checkpoint"] = eval_ckpt;
            cfg["prototypes"] = eval_protos;
            cfg["split"] = eval_split;
            cfg["episode_seed"] = ckpt.episode_seed;
            cfg["shots"] = ckpt.shots;
            echo_config(out, "eval", cfg);

            std::optional<PrototypeFile> pf;
            if (!eval_protos.empty()) pf = load_prototypes(eval_protos);
            const Model model = assemble_model(bank, manifest, ckpt, pf ? &*pf : nullptr);
            const auto queries = make_queries(bank, split_indices(bank, manifest, split));
            const AccuracyReport report = evaluate(queries, model, fusion, eval_workers);
            if (!eval_out.empty()) write_text_atomic(eval_out, format_report(report, manifest.classes, cfg));
            json summary = {{"accuracy", report.accuracy}, {"correct", report.correct},
                            {"total", report.total}};
            if (report.zero_shot_accuracy) summary["zero_shot_accuracy"] = *report.zero_shot_accuracy;
            out << "summary " << summary.dump() << "\n";
            return ok;
        }

        if (*dcov_cmd) {
            const FeatureBank bank = read_bank(dcov_data.bank);
            if (!bank.has_maps()) throw DataError("bank carries no feature maps");
            const auto xs = parse_channels(dcov_x, bank.map_rows, "--x");
            const auto ys = parse_channels(dcov_y, bank.map_rows, "--y");
            std::optional<Manifest> manifest;
            std::optional<Split> split;
            if (!dcov_split.empty()) {
                if (dcov_data.manifest.empty()) throw std::invalid_argument("--split needs --manifest");
                manifest = read_manifest(dcov_data.manifest);
                split = parse_split(dcov_split);
            }
            echo_config(out, "dcov",
                        {{"bank", dcov_data.bank}, {"x", xs}, {"y", ys},
                         {"label", dcov_label ? json(*dcov_label) : json(nullptr)},
                         {"split", dcov_split}, {"max_samples", dcov_max}});

            std::vector<double> xv, yv;
            std::size_t n = 0;
            for (const BankItem& item : bank.items) {
                if (is_text_item(item)) continue;
                if (dcov_label && item.label != *dcov_label) continue;
                if (split) {
                    const auto it = manifest->splits.find(item.id);
                    if (it == manifest->splits.end() || it->second != *split) continue;
                }
                for (std::size_t p = 0; p < item.map.cols() && n < dcov_max; ++p, ++n) {
                    for (std::size_t c : xs) xv.push_back(item.map(c, p));
                    for (std::size_t c : ys) yv.push_back(item.map(c, p));
                }
                if (n >= dcov_max) break;
            }
            if (n < 2) throw DataError("dcov: fewer than 2 samples selected");
            const Matrix x(n, xs.size(), xv);
            const Matrix y(n, ys.size(), yv);
            json res = {{"samples", n}, {"dcov2", dcov_oracle(x, y)}, {"dcorr", dcorr(x, y)}};
            if (xs.size() == 1 && ys.size() == 1) res["pearson"] = pearson(xv, yv);
            out << "result " << res.dump() << "\n";
            return ok;
        }

        if (*grid_cmd) {
            const FeatureBank bank = read_bank(grid_data.bank);
            const Manifest manifest = read_manifest(grid_data.manifest);
            const Checkpoint ckpt = load_checkpoint(grid_ckpt);
            FusionConfig base = ckpt.fusion;
            if (grid_tau) base.tau = *grid_tau;
            const Split split = parse_split(grid_split);
            json cfg = {{"checkpoint", grid_ckpt}, {"alphas", grid_alphas},
                        {"deltas", grid_deltas}, {"tau", base.tau}, {"split", grid_split}};
            echo_config(out, "grid", cfg);
            const Model model = assemble_model(bank, manifest, ckpt);
            const auto queries = make_queries(bank, split_indices(bank, manifest, split));
            const GridResult grid = grid_search(grid_alphas, grid_deltas, queries, model, base);
            const std::string text = format_grid(grid, cfg);
            if (!grid_out.empty()) write_text_atomic(grid_out, text);
            out << text;
            return ok;
        }

        if (*abl_cmd) {
            const FeatureBank bank = read_bank(abl_data.bank);
            const Manifest manifest = read_manifest(abl_data.manifest);
            const PipelineConfig cfg = resolve_pipeline(abl_pipe, abl_train, abl_fusion);
            json cfg_json = to_json(cfg, manifest.classes.size(), bank.map_rows);
            cfg_json["split"] = abl_split;
            echo_config(out, "ablate", cfg_json);
            const auto rows = run_ablation(bank, manifest, cfg, parse_split(abl_split));
            if (!abl_out.empty()) write_text_atomic(abl_out, format_ablation(rows, cfg_json));
            out << ablation_table(rows);
            return ok;
        }
    } catch (const FormatError& e) {
        err << "error: exit=2 kind=" << to_string(e.kind()) << " offset=" << e.offset()
            << " msg=" << e.what() << "\n";
        return data_error;
    } catch (const NumericalError& e) {
        err << "error: exit=3 kind=numerical msg=" << e.what() << "\n";
        return numerical_error;
    } catch (const DimensionError& e) {
        err << "error: exit=2 kind=dimension msg=" << e.what() << "\n";
        return data_error;
    } catch (const std::invalid_argument& e) {
        // Bad flag values (unknown kinds, out-of-range hyper-parameters).
        err << "error: exit=1 kind=usage msg=" << e.what() << "\n";
        return usage_error;
    } catch (const std::exception& e) {
        err << "error: exit=2 kind=data msg=" << e.what() << "\n";
        return data_error;
    }
    return usage_error;
}

} // namespace bdc::cli

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "xmc/cli.hpp"
#include "xmc/clustering.hpp"
#include "xmc/evaluator.hpp"

using namespace xmc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Small, fully separable benchmark that trains in well under a second.
const char* kTinyBase =
    "num_identities = 8\n"
    "samples_per_identity = 6\n"
    "dim = 16\n"
    "spread = 0.05\n"
    "offset = 0.2\n"
    "fragmentation = 0\n"
    "seed = 5\n"
    "epochs = 2\n"
    "steps_per_epoch = 2\n"
    "ids_per_batch = 4\n"
    "instances_per_id = 4\n"
    "learning_rate = 0.05\n"
    "k = 4\n"
    "eps = 0.2\n";

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("config parsing") {
    TempDir dir("xmc_cli_config");

    SUBCASE("unknown keys are rejected by name") {
        write(dir.path / "c.cfg", "mu = 0.7\nlambdaa = 3\n");
        CHECK_THROWS_WITH_AS(cli::load_config(dir.path / "c.cfg"),
                             doctest::Contains("lambdaa"), cli::UserError);
    }
    SUBCASE("bad values are rejected with the key name") {
        write(dir.path / "c.cfg", "mu = banana\n");
        const auto cfg = cli::load_config(dir.path / "c.cfg");
        CHECK_THROWS_WITH_AS(cli::train_config_from(cfg), doctest::Contains("mu"),
                             cli::UserError);
    }
    SUBCASE("out-of-range values are rejected") {
        write(dir.path / "c.cfg", "mu = 1.5\n");
        CHECK_THROWS_AS(cli::train_config_from(cli::load_config(dir.path / "c.cfg")),
                        cli::UserError);
    }
    SUBCASE("duplicate keys are rejected") {
        write(dir.path / "c.cfg", "mu = 0.7\nmu = 0.8\n");
        CHECK_THROWS_WITH_AS(cli::load_config(dir.path / "c.cfg"),
                             doctest::Contains("duplicate"), cli::UserError);
    }
    SUBCASE("comments are stripped and defaults fill the gaps") {
        write(dir.path / "c.cfg", "# just a comment\n\nmu = 0.6 # trailing\n");
        const auto cfg = cli::load_config(dir.path / "c.cfg");
        const auto tc = cli::train_config_from(cfg);
        CHECK(tc.mu == 0.6);
        CHECK(tc.lambda == 3.0);
        CHECK(tc.w == 10.0);
        CHECK(tc.tau == 0.05);
        CHECK(tc.momentum == 0.2);
        CHECK(tc.dbscan_min_pts == 4);
        CHECK(tc.mode == TrainMode::Full);
    }
    SUBCASE("mode parses and bad modes fail") {
        write(dir.path / "c.cfg", "mode = dw\n");
        CHECK(cli::train_config_from(cli::load_config(dir.path / "c.cfg")).mode ==
              TrainMode::DWOnly);
        write(dir.path / "d.cfg", "mode = everything\n");
        CHECK_THROWS_AS(cli::train_config_from(cli::load_config(dir.path / "d.cfg")),
                        cli::UserError);
    }
}

TEST_CASE("seed list parsing") {
    CHECK(cli::parse_seed_list("1,2,3") == std::vector<std::uint64_t>{1, 2, 3});
    CHECK_THROWS_AS(cli::parse_seed_list("1,1,2"), cli::UserError);
    CHECK_THROWS_AS(cli::parse_seed_list("1,,2"), cli::UserError);
    CHECK_THROWS_AS(cli::parse_seed_list("1,x"), cli::UserError);
}

TEST_CASE("XMC_THREADS caps the ablate worker count") {
    setenv("XMC_THREADS", "1", 1);
    CHECK(cli::thread_budget(8) == 1);
    setenv("XMC_THREADS", "16", 1);
    CHECK(cli::thread_budget(8) == 8);   // never more workers than runs
    setenv("XMC_THREADS", "zero", 1);
    CHECK_THROWS_AS(cli::thread_budget(8), cli::UserError);
    unsetenv("XMC_THREADS");
    CHECK(cli::thread_budget(8) >= 1);
}

TEST_CASE("generate writes loadable files and reacts to the seed") {
    TempDir dir("xmc_cli_generate");
    write(dir.path / "empty.cfg", "# defaults only\n");

    cli::Options opts;
    opts.config = dir.path / "empty.cfg";
    opts.out = dir.path / "out";
    CHECK(cli::cmd_generate(opts) == 0);

    const auto vis = load_features(opts.out / "visible.xmc");
    const auto inf = load_features(opts.out / "infrared.xmc");
    CHECK(vis.dim() == inf.dim());
    CHECK(vis.modality == Modality::Visible);
    CHECK(inf.modality == Modality::Infrared);
    CHECK(vis.truth.has_value());

    write(dir.path / "seeded.cfg", "seed = 99\nnum_identities = 4\nsamples_per_identity = 3\ndim = 8\n");
    cli::Options seeded = opts;
    seeded.config = dir.path / "seeded.cfg";
    seeded.out = dir.path / "out2";
    cli::cmd_generate(seeded);
    write(dir.path / "seeded2.cfg", "seed = 100\nnum_identities = 4\nsamples_per_identity = 3\ndim = 8\n");
    cli::Options seeded2 = seeded;
    seeded2.config = dir.path / "seeded2.cfg";
    seeded2.out = dir.path / "out3";
    cli::cmd_generate(seeded2);
    CHECK(slurp(seeded.out / "visible.xmc") != slurp(seeded2.out / "visible.xmc"));
}

TEST_CASE("fragmentation measurably degrades clustering against truth") {
    TempDir dir("xmc_cli_frag");
    const char* base =
        "num_identities = 10\nsamples_per_identity = 16\ndim = 32\n"
        "spread = 0.25\noffset = 0.3\nseed = 21\n";
    write(dir.path / "clean.cfg", std::string(base) + "fragmentation = 0\n");
    write(dir.path / "split.cfg", std::string(base) + "fragmentation = 0.5\n");

    cli::Options clean, split;
    clean.config = dir.path / "clean.cfg";
    clean.out = dir.path / "clean";
    split.config = dir.path / "split.cfg";
    split.out = dir.path / "split";
    cli::cmd_generate(clean);
    cli::cmd_generate(split);

    const auto ari_of = [](const fs::path& file) {
        const auto set = load_features(file);
        const auto assignment = dbscan(set, 0.15, 4);
        return label_quality(assignment, *set.truth).ari;
    };
    CHECK(ari_of(split.out / "visible.xmc") < ari_of(clean.out / "visible.xmc"));
}

TEST_CASE("run trains, writes every artifact, and is byte-deterministic") {
    TempDir dir("xmc_cli_run");
    write(dir.path / "run.cfg", std::string(kTinyBase) +
                                    "features_visible = data/visible.xmc\n"
                                    "features_infrared = data/infrared.xmc\n");
    cli::Options gen;
    gen.config = dir.path / "run.cfg";
    gen.out = dir.path / "data";
    cli::cmd_generate(gen);

    cli::Options run = gen;
    run.out = dir.path / "a";
    CHECK(cli::cmd_run(run) == 0);
    CHECK(fs::exists(run.out / "manifest.json"));
    CHECK(fs::exists(run.out / "encoder.txt"));
    CHECK(fs::exists(run.out / "epochs.log"));

    const auto v2i = parse_metrics(slurp(run.out / "metrics_v2i.txt"));
    const auto i2v = parse_metrics(slurp(run.out / "metrics_i2v.txt"));
    CHECK(v2i.map == doctest::Approx(1.0).epsilon(1e-9));   // separable data
    CHECK(i2v.map == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(v2i.xmatch == doctest::Approx(1.0).epsilon(1e-9));

    cli::Options rerun = run;
    rerun.out = dir.path / "b";
    cli::cmd_run(rerun);
    CHECK(slurp(run.out / "epochs.log") == slurp(rerun.out / "epochs.log"));
    CHECK(slurp(run.out / "metrics_v2i.txt") == slurp(rerun.out / "metrics_v2i.txt"));
    CHECK(slurp(run.out / "metrics_i2v.txt") == slurp(rerun.out / "metrics_i2v.txt"));

    SUBCASE("the saved encoder feeds standalone evaluation") {
        TempDir eval_dir("xmc_cli_eval_enc");
        write(eval_dir.path / "eval.cfg",
              std::string(kTinyBase) + "features_visible = " + (dir.path / "data/visible.xmc").string() +
                  "\nfeatures_infrared = " + (dir.path / "data/infrared.xmc").string() +
                  "\nencoder = " + (run.out / "encoder.txt").string() + "\n");
        cli::Options eval;
        eval.config = eval_dir.path / "eval.cfg";
        eval.out = eval_dir.path / "out";
        CHECK(cli::cmd_eval(eval) == 0);
        CHECK(parse_metrics(slurp(eval.out / "metrics_v2i.txt")).map ==
              doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("label dumps appear per epoch when requested") {
        TempDir dump_dir("xmc_cli_dump");
        write(dump_dir.path / "run.cfg",
              std::string(kTinyBase) + "dump_labels = 1\nfeatures_visible = " +
                  (dir.path / "data/visible.xmc").string() + "\nfeatures_infrared = " +
                  (dir.path / "data/infrared.xmc").string() + "\n");
        cli::Options dumped;
        dumped.config = dump_dir.path / "run.cfg";
        dumped.out = dump_dir.path / "out";
        cli::cmd_run(dumped);
        CHECK(fs::exists(dumped.out / "labels_epoch_000.jsonl"));
        CHECK(fs::exists(dumped.out / "labels_epoch_001.jsonl"));
        CHECK(!slurp(dumped.out / "labels_epoch_000.jsonl").empty());
    }

    SUBCASE("mode flag overrides the config and lands in the manifest") {
        cli::Options base_run = run;
        base_run.out = dir.path / "baseline";
        base_run.mode = TrainMode::Baseline;
        cli::cmd_run(base_run);
        const std::string manifest = slurp(base_run.out / "manifest.json");
        CHECK(manifest.find("\"mode\": \"baseline\"") != std::string::npos);
        CHECK(manifest.find("\"mu\": 1.0") != std::string::npos);
        // differs from the full run only in mode and results, not in inputs
        const std::string full_manifest = slurp(run.out / "manifest.json");
        CHECK(full_manifest.find("\"mode\": \"full\"") != std::string::npos);
    }
}

TEST_CASE("run rejects missing feature files with a user error") {
    TempDir dir("xmc_cli_missing");
    write(dir.path / "run.cfg", std::string(kTinyBase) +
                                    "features_visible = nowhere.xmc\n"
                                    "features_infrared = alsonowhere.xmc\n");
    cli::Options run;
    run.config = dir.path / "run.cfg";
    run.out = dir.path / "out";
    CHECK_THROWS_AS(cli::cmd_run(run), cli::UserError);
}

TEST_CASE("eval with the identity encoder on separable data is perfect") {
    TempDir dir("xmc_cli_eval");
    write(dir.path / "cfg.cfg", std::string(kTinyBase) +
                                    "features_visible = data/visible.xmc\n"
                                    "features_infrared = data/infrared.xmc\n");
    cli::Options gen;
    gen.config = dir.path / "cfg.cfg";
    gen.out = dir.path / "data";
    cli::cmd_generate(gen);

    cli::Options eval = gen;
    eval.out = dir.path / "eval";
    CHECK(cli::cmd_eval(eval) == 0);
    CHECK(parse_metrics(slurp(eval.out / "metrics_v2i.txt")).map == doctest::Approx(1.0));
    CHECK(parse_metrics(slurp(eval.out / "metrics_i2v.txt")).map == doctest::Approx(1.0));
}

TEST_CASE("eval requires truth") {
    TempDir dir("xmc_cli_eval_no_truth");
    // hand-written file without truth
    write(dir.path / "v.xmc", "XMC1 visible 2 2 0\n0 1 0\n1 0 1\n");
    write(dir.path / "i.xmc", "XMC1 infrared 2 2 0\n0 1 0\n1 0 1\n");
    write(dir.path / "cfg.cfg",
          "features_visible = v.xmc\nfeatures_infrared = i.xmc\neps = 0.5\nmin_pts = 1\n");
    cli::Options eval;
    eval.config = dir.path / "cfg.cfg";
    eval.out = dir.path / "out";
    CHECK_THROWS_AS(cli::cmd_eval(eval), cli::UserError);
}

TEST_CASE("ablate validates seeds and writes the mode table") {
    TempDir dir("xmc_cli_ablate");
    write(dir.path / "cfg.cfg", kTinyBase);

    cli::Options ablate;
    ablate.config = dir.path / "cfg.cfg";
    ablate.out = dir.path / "out";

    SUBCASE("fewer than three seeds is an error") {
        ablate.seeds = {1, 2};
        CHECK_THROWS_AS(cli::cmd_ablate(ablate), cli::UserError);
    }
    SUBCASE("three seeds produce a four-mode table and artifacts per run") {
        ablate.seeds = {1, 2, 3};
        CHECK(cli::cmd_ablate(ablate) == 0);
        const std::string table = slurp(ablate.out / "ablation.txt");
        for (const char* mode : {"baseline", "ulc", "dw", "full"})
            CHECK(table.find(mode) != std::string::npos);
        CHECK(table.find("full_minus_baseline_map") != std::string::npos);
        CHECK(fs::exists(ablate.out / "ablation.json"));
        CHECK(fs::exists(ablate.out / "seed2" / "dw" / "metrics_v2i.txt"));
        CHECK(fs::exists(ablate.out / "seed3" / "visible.xmc"));
        const std::string manifest = slurp(ablate.out / "seed1" / "baseline" / "manifest.json");
        CHECK(manifest.find("\"mu\": 1.0") != std::string::npos);
    }
}

TEST_SUITE_END();

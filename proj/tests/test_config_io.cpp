#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fluxqa/config.hpp"
#include "fluxqa/io.hpp"

using namespace fluxqa;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& body) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p);
    out << body;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("preset figure1 carries the C-shunt parameters") {
    const RunConfig cfg = preset_config("figure1");
    REQUIRE(cfg.system == SystemKind::cshunt_1q);
    REQUIRE(cfg.cshunt.params.kinetic_energy == Catch::Approx(3.03));
    REQUIRE(cfg.cshunt.params.josephson_energy == Catch::Approx(86.2));
    REQUIRE(cfg.cshunt.params.cshunt_scale == Catch::Approx(1.0e4));
    REQUIRE(cfg.cshunt.schedule.cjj_flux_endpoints.first == Catch::Approx(2.9));
    REQUIRE(cfg.cshunt.schedule.cjj_flux_endpoints.second == Catch::Approx(2.2));
    REQUIRE(cfg.cshunt.schedule.s_grid.size() == 100);
    REQUIRE(cfg.cshunt.mesh.points == 600);
    REQUIRE(cfg.t_f == Catch::Approx(5.0));
}

TEST_CASE("preset figure2 carries the CJJ pair parameters") {
    const RunConfig cfg = preset_config("figure2");
    REQUIRE(cfg.system == SystemKind::cjj_2q);
    REQUIRE(cfg.cjj.params.kinetic_energy == Catch::Approx(3.44));
    REQUIRE(cfg.cjj.params.josephson_energy == Catch::Approx(684.0));
    REQUIRE(cfg.cjj.params.inductive_energy == Catch::Approx(570.0));
    REQUIRE(cfg.cjj.params.mutual_energy == Catch::Approx(3.98));
    REQUIRE(cfg.cjj.schedule.cjj_flux_endpoints.first == Catch::Approx(2.6));
    REQUIRE(cfg.cjj.schedule.cjj_flux_endpoints.second == Catch::Approx(1.9));
    REQUIRE(cfg.cjj.ising.local_fields == std::vector<double>{1.0, 0.4});
    REQUIRE(cfg.cjj.ising.coupling(0, 1) == Catch::Approx(-0.7));
    REQUIRE(cfg.cjj.mesh.points == 200);
}

TEST_CASE("config loading: unknown keys and malformed files are rejected") {
    const auto bad_key = write_temp("fluxqa_bad_key.json", R"({"preset": "figure1", "solvr": {}})");
    try {
        load_config(bad_key.string());
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        REQUIRE(std::string(e.what()).find("solvr") != std::string::npos);
    }

    const auto nested = write_temp("fluxqa_bad_nested.json",
                                   R"({"cshunt": {"params": {"E_X": 1.0}}})");
    REQUIRE_THROWS_AS(load_config(nested.string()), ValidationError);

    const auto broken = write_temp("fluxqa_broken.json", "{ not json");
    REQUIRE_THROWS_AS(load_config(broken.string()), ParseError);
    REQUIRE_THROWS_AS(load_config("/nonexistent/path.json"), ParseError);
}

TEST_CASE("config loading: dynamics experiments require t_f") {
    const auto p = write_temp("fluxqa_no_tf.json",
                              R"({"preset": "figure1", "dynamics": {"t_f": 0.0}})");
    REQUIRE_THROWS_AS(load_config(p.string()), ValidationError);
    const auto p2 = write_temp("fluxqa_no_list.json",
                               R"({"preset": "figure3", "dynamics": {"t_f_list": []}})");
    REQUIRE_THROWS_AS(load_config(p2.string()), ValidationError);
}

TEST_CASE("config loading: cshunt table mode needs a table") {
    const auto p = write_temp("fluxqa_table.json",
                              R"({"preset": "figure1", "cshunt": {"bias_mode": "table"}})");
    REQUIRE_THROWS_AS(load_config(p.string()), ValidationError);
    const auto p2 = write_temp(
        "fluxqa_table_ok.json",
        R"({"preset": "figure1",
            "cshunt": {"bias_mode": "table", "ip_table": [[0.0, -5.0], [1.0, -60.0]]}})");
    const RunConfig cfg = load_config(p2.string());
    REQUIRE(cfg.cshunt.profile_options.cshunt_mode == CshuntBiasMode::table);
    REQUIRE((*cfg.cshunt.profile_options.cshunt_ip_table)(0.0) == Catch::Approx(-5.0));
}

TEST_CASE("environment overrides are limited to output directory and threads") {
    RunConfig cfg = default_config();
    setenv("FLUXQA_OUT", "/tmp/fluxqa_env_dir", 1);
    setenv("FLUXQA_THREADS", "3", 1);
    apply_env_overrides(cfg);
    unsetenv("FLUXQA_OUT");
    unsetenv("FLUXQA_THREADS");
    REQUIRE(cfg.output_directory == "/tmp/fluxqa_env_dir");
    REQUIRE(cfg.threads == 3);
}

TEST_CASE("experiments are deterministic and CSVs carry headers") {
    const std::string body = R"({
        "preset": "figure1",
        "cshunt": { "schedule": { "s_points": 25 }, "mesh": { "points": 121 } },
        "dynamics": { "t_f": 5.0 }
    })";
    const auto p = write_temp("fluxqa_det.json", body);
    RunConfig cfg = load_config(p.string());

    cfg.output_directory = (fs::temp_directory_path() / "fluxqa_det_a").string();
    run_experiment(cfg);
    cfg.output_directory = (fs::temp_directory_path() / "fluxqa_det_b").string();
    run_experiment(cfg);

    for (const char* name : {"schedule.csv", "dynamics.csv", "gap_ratio.csv", "frame.csv"}) {
        const std::string a = slurp(fs::temp_directory_path() / "fluxqa_det_a" / name);
        const std::string b = slurp(fs::temp_directory_path() / "fluxqa_det_b" / name);
        REQUIRE(!a.empty());
        REQUIRE(a == b);
        REQUIRE(a.substr(0, 2) == "s,");  // header row first
    }

    const std::string sched = slurp(fs::temp_directory_path() / "fluxqa_det_a" / "schedule.csv");
    REQUIRE(sched.find("A_GHz") != std::string::npos);
    REQUIRE(sched.find("gy_per_s") != std::string::npos);

    const std::string manifest = slurp(fs::temp_directory_path() / "fluxqa_det_a" / "manifest.json");
    REQUIRE(manifest.find("config_hash") != std::string::npos);
    REQUIRE(manifest.find("wall_time_seconds") != std::string::npos);
}

TEST_CASE("run_experiment figure6 emits both gap-ratio files") {
    RunConfig cfg = preset_config("figure6");
    cfg.cshunt.schedule.s_grid = uniform_grid(21);
    cfg.cshunt.mesh.points = 101;
    cfg.cjj.schedule.s_grid = uniform_grid(15);
    cfg.cjj.mesh.points = 48;
    cfg.output_directory = (fs::temp_directory_path() / "fluxqa_fig6").string();
    const ExperimentResult r = run_experiment(cfg);
    REQUIRE(fs::exists(fs::path(cfg.output_directory) / "gap_ratio_1q.csv"));
    REQUIRE(fs::exists(fs::path(cfg.output_directory) / "gap_ratio_2q.csv"));
    REQUIRE(fs::exists(fs::path(cfg.output_directory) / "manifest.json"));
    REQUIRE(r.files.size() >= 2);
}

#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "liso/backfit.hpp"
#include "liso/csv.hpp"
#include "liso/rng.hpp"
#include "liso/serialize.hpp"
#include "liso/shrink.hpp"

using namespace liso;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir() {
    std::string tmpl = (fs::temp_directory_path() / "liso_cli_XXXXXX").string();
    char* got = mkdtemp(tmpl.data());
    REQUIRE(got != nullptr);
    return fs::path(got);
}

RunResult run_cli(const fs::path& dir, const std::string& args) {
    const fs::path out = dir / "__stdout", err = dir / "__stderr";
    const std::string cmd = std::string(LISO_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// deterministic little regression table
std::string demo_csv(std::size_t n = 12) {
    Rng rng(0xC11);
    std::ostringstream ss;
    ss << "x1,x2,y\n";
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = rng.uniform(-1.0, 1.0);
        const double x2 = rng.uniform(-1.0, 1.0);
        const double y = 2.0 * x1 - x2 + 0.1 * rng.normal();
        ss << format_double(x1) << ',' << format_double(x2) << ',' << format_double(y) << '\n';
    }
    return ss.str();
}

}  // namespace

TEST_CASE("csv reader parses headers, numbers, and layout quirks") {
    const Table t = read_csv("a,b\n1,2\n+3.5,4e-1\r\n -1 ,\t2\n");
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows() == 3);
    CHECK(t.columns[0] == std::vector<double>{1.0, 3.5, -1.0});
    CHECK(t.columns[1] == std::vector<double>{2.0, 0.4, 2.0});
    CHECK(t.find("b") == 1);
    CHECK(t.find("zz") == t.header.size());

    // a UTF-8 byte-order mark before the header is stripped
    const Table bom = read_csv("\xEF\xBB\xBF" "col\n7\n");
    CHECK(bom.header == std::vector<std::string>{"col"});
    CHECK(bom.columns[0][0] == 7.0);

    // trailing newline optional
    CHECK(read_csv("a\n1").rows() == 1);
}

TEST_CASE("csv reader reports the offending cell") {
    CHECK_THROWS_WITH_AS(read_csv(""), "row 1: missing header row", CsvError);
    CHECK_THROWS_AS(read_csv("a,b\n1\n"), CsvError);
    CHECK_THROWS_AS(read_csv("a\nx\n"), CsvError);
    CHECK_THROWS_AS(read_csv("a\n\n1\n"), CsvError);   // blank interior row
    CHECK_THROWS_AS(read_csv("a\nnan\n"), CsvError);   // non-finite rejected
    CHECK_THROWS_AS(read_csv("a\ninf\n"), CsvError);
    CHECK_THROWS_AS(read_csv("a\n1,5\n"), CsvError);   // comma means two cells
    CHECK_THROWS_AS(read_csv("a,\n1,2\n"), CsvError);  // empty header name
    CHECK_THROWS_AS(read_csv("a\n1e\n"), CsvError);    // trailing garbage
    try {
        read_csv("a,b\n1,2\n3,oops\n");
        FAIL("expected a parse error");
    } catch (const CsvError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 3") != std::string::npos);
        CHECK(msg.find("column 2") != std::string::npos);
        CHECK(msg.find("oops") != std::string::npos);
    }
}

TEST_CASE("fit writes a model that predict reproduces in-sample") {
    const fs::path dir = temp_dir();
    write_file(dir / "train.csv", demo_csv());
    const RunResult fit = run_cli(
        dir, "fit --input " + (dir / "train.csv").string() + " --response y --lambda 0.1" +
                 " --output " + (dir / "model.json").string());
    REQUIRE(fit.code == 0);
    const ModelEnvelope env = model_from_json(slurp(dir / "model.json"));
    CHECK(env.columns == std::vector<std::string>{"x1", "x2"});
    CHECK(env.response == "y");
    CHECK(env.model.lambda == 0.1);

    const RunResult pred = run_cli(
        dir, "predict --model " + (dir / "model.json").string() + " --input " +
                 (dir / "train.csv").string() + " --output " + (dir / "pred.csv").string());
    REQUIRE(pred.code == 0);

    // reproduce the fit in-process and compare predictions
    const Table t = read_csv(demo_csv());
    const Dataset d = Dataset::make(t.columns[2], {t.columns[0], t.columns[1]});
    const std::vector<double> expect = predict(env.model, d.columns());
    const Table got = read_csv(slurp(dir / "pred.csv"));
    REQUIRE(got.rows() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK(got.columns[0][i] == doctest::Approx(expect[i]).epsilon(1e-9));

    // in-sample predictions equal the model's training fit
    LisoConfig c;
    c.lambda = 0.1;
    const AdditiveModel direct = liso_fit(d, c);
    const std::vector<double> f = fitted(d, direct);
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(got.columns[0][i] == doctest::Approx(f[i]).epsilon(1e-9));
}

TEST_CASE("fit at lambda zero on one covariate is the isotonic fit") {
    const fs::path dir = temp_dir();
    write_file(dir / "tiny.csv", "x,y\n0,-1\n1,5\n2,3\n");
    const RunResult fit =
        run_cli(dir, "fit --input " + (dir / "tiny.csv").string() +
                         " --response y --lambda 0 --output " + (dir / "m.json").string());
    REQUIRE(fit.code == 0);
    const ModelEnvelope env = model_from_json(slurp(dir / "m.json"));
    const StepFunction pava = univariate_liso(
        merge_ties(std::vector<double>{0, 1, 2}, std::vector<double>{-1, 5, 3},
                   std::vector<double>{1, 1, 1}),
        0.0);
    const auto& f = env.model.components[0];
    REQUIRE(f.size() == 3);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(f.values()[j] + env.model.intercept == doctest::Approx(pava.values()[j]));
}

TEST_CASE("fit beyond the flattening penalty writes a zero model") {
    const fs::path dir = temp_dir();
    write_file(dir / "t.csv", demo_csv());
    const RunResult fit =
        run_cli(dir, "fit --input " + (dir / "t.csv").string() +
                         " --response y --lambda 1e9 --output " + (dir / "m.json").string());
    REQUIRE(fit.code == 0);
    const ModelEnvelope env = model_from_json(slurp(dir / "m.json"));
    CHECK(env.model.active_count() == 0);
    const Table t = read_csv(demo_csv());
    double mean = 0.0;
    for (double v : t.columns[2]) mean += v;
    mean /= static_cast<double>(t.rows());
    CHECK(env.model.intercept == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("direction overrides constrain the named column") {
    const fs::path dir = temp_dir();
    std::ostringstream ss;
    ss << "x,y\n";
    Rng rng(7);
    for (int i = 0; i < 15; ++i) {
        const double x = rng.uniform(-1.0, 1.0);
        ss << format_double(x) << ',' << format_double(-3.0 * x + 0.05 * rng.normal()) << '\n';
    }
    write_file(dir / "down.csv", ss.str());
    const RunResult fit = run_cli(
        dir, "fit --input " + (dir / "down.csv").string() +
                 " --response y --lambda 0.05 --direction x=dec --output " +
                 (dir / "m.json").string());
    REQUIRE(fit.code == 0);
    const ModelEnvelope env = model_from_json(slurp(dir / "m.json"));
    CHECK(env.model.directions[0] == Direction::decreasing);
    CHECK(env.model.components[0].non_increasing());
    CHECK(env.model.components[0].total_variation() > 1.0);

    const RunResult bad = run_cli(
        dir, "fit --input " + (dir / "down.csv").string() +
                 " --response y --lambda 0.05 --direction nope=dec --output -");
    CHECK(bad.code == 1);
    CHECK(bad.err.find("error[E_COLUMN]") == 0);
}

TEST_CASE("outputs are byte-identical across reruns") {
    const fs::path dir = temp_dir();
    write_file(dir / "t.csv", demo_csv());
    const std::string fit_args = "fit --input " + (dir / "t.csv").string() +
                                 " --response y --lambda 0.07 --output ";
    REQUIRE(run_cli(dir, fit_args + (dir / "a.json").string()).code == 0);
    REQUIRE(run_cli(dir, fit_args + (dir / "b.json").string()).code == 0);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));

    const std::string cv_args = "cv --input " + (dir / "t.csv").string() +
                                " --response y --folds 3 --seed 11 --grid 1:0.01:8:log --output ";
    REQUIRE(run_cli(dir, cv_args + (dir / "cv_a.json").string()).code == 0);
    REQUIRE(run_cli(dir, cv_args + (dir / "cv_b.json").string()).code == 0);
    CHECK(slurp(dir / "cv_a.json") == slurp(dir / "cv_b.json"));
    CHECK(slurp(dir / "cv_a.csv") == slurp(dir / "cv_b.csv"));
    // different seed changes the folds
    REQUIRE(run_cli(dir, "cv --input " + (dir / "t.csv").string() +
                             " --response y --folds 3 --seed 12 --grid 1:0.01:8:log --output " +
                             (dir / "cv_c.json").string())
                .code == 0);
    CHECK(slurp(dir / "cv_a.json") != slurp(dir / "cv_c.json"));
}

TEST_CASE("cv writes a report and a sibling table") {
    const fs::path dir = temp_dir();
    write_file(dir / "t.csv", demo_csv(20));
    const RunResult cv =
        run_cli(dir, "cv --input " + (dir / "t.csv").string() +
                         " --response y --folds 4 --seed 5 --output " + (dir / "cv.json").string());
    REQUIRE(cv.code == 0);
    const CvReport rep = cv_report_from_json(slurp(dir / "cv.json"));
    CHECK(rep.folds == 4);
    CHECK(rep.seed == 5);
    CHECK(rep.grid.size() == 50);  // default grid
    CHECK(rep.lambda_1se >= rep.lambda_min);
    const std::string table = slurp(dir / "cv.csv");
    CHECK(table.substr(0, table.find('\n')) == "lambda,mean_mse,sd_mse");
    CHECK(std::count(table.begin(), table.end(), '\n') == 51);
}

TEST_CASE("path emits a summary row per grid point") {
    const fs::path dir = temp_dir();
    write_file(dir / "t.csv", demo_csv(15));
    const RunResult path = run_cli(
        dir, "path --input " + (dir / "t.csv").string() +
                 " --response y --grid 0.9:0.009:6:log --output " + (dir / "path.csv").string() +
                 " --models " + (dir / "models.json").string());
    REQUIRE(path.code == 0);
    const std::string table = slurp(dir / "path.csv");
    CHECK(table.substr(0, table.find('\n')) == "lambda,active,tv_x1,tv_x2");
    CHECK(std::count(table.begin(), table.end(), '\n') == 7);
    const std::vector<AdditiveModel> models = models_from_json(slurp(dir / "models.json"));
    CHECK(models.size() == 6);
    CHECK(models.front().lambda == doctest::Approx(0.9));
    CHECK(models.back().lambda == doctest::Approx(0.009));
}

TEST_CASE("signfit writes a signed model") {
    const fs::path dir = temp_dir();
    std::ostringstream ss;
    ss << "x,y\n";
    for (int i = 0; i < 12; ++i) {
        const double x = -1.0 + 2.0 * i / 11.0;
        ss << format_double(x) << ',' << format_double(std::abs(x)) << '\n';
    }
    write_file(dir / "v.csv", ss.str());
    const RunResult sf =
        run_cli(dir, "signfit --input " + (dir / "v.csv").string() +
                         " --response y --lambda 0.05 --output " + (dir / "sm.json").string());
    REQUIRE(sf.code == 0);
    const SignedEnvelope env = signed_model_from_json(slurp(dir / "sm.json"));
    CHECK(env.model.plus[0].non_decreasing());
    CHECK(env.model.minus[0].non_increasing());
    CHECK(env.model.model.components[0].total_variation() > 0.5);
}

TEST_CASE("variant fits run the two-stage procedure") {
    const fs::path dir = temp_dir();
    write_file(dir / "t.csv", demo_csv(25));
    const RunResult fit = run_cli(
        dir, "fit --input " + (dir / "t.csv").string() +
                 " --response y --lambda 0.05 --lambda0 0.2 --variant adaptive --output " +
                 (dir / "m.json").string());
    REQUIRE(fit.code == 0);
    const ModelEnvelope env = model_from_json(slurp(dir / "m.json"));
    CHECK(env.model.lambda == doctest::Approx(0.05));

    const RunResult bad = run_cli(dir, "fit --input " + (dir / "t.csv").string() +
                                           " --response y --lambda 0.05 --variant turbo");
    CHECK(bad.code == 1);
    CHECK(bad.err.find("error[E_ARGS]") == 0);
}

TEST_CASE("simulate and recovery write deterministic tables") {
    const fs::path dir = temp_dir();
    const std::string sim_args =
        "simulate --scenario all_linear --n 30 --p 6 --n-test 50 --snr 7 --methods plain"
        " --reps 2 --seed 4 --output ";
    REQUIRE(run_cli(dir, sim_args + (dir / "s1.csv").string()).code == 0);
    REQUIRE(run_cli(dir, sim_args + (dir / "s2.csv").string()).code == 0);
    const std::string s1 = slurp(dir / "s1.csv");
    CHECK(s1 == slurp(dir / "s2.csv"));
    CHECK(s1.substr(0, s1.find('\n')) == "scenario,method,snr,mean_mse,mean_relative_mse,se");

    const std::string rec_args =
        "recovery --p-list 8 --n-list 16,48 --reps 2 --master-n 128 --grid-count 25 --seed 9"
        " --output ";
    REQUIRE(run_cli(dir, rec_args + (dir / "r1.csv").string()).code == 0);
    REQUIRE(run_cli(dir, rec_args + (dir / "r2.csv").string()).code == 0);
    const std::string r1 = slurp(dir / "r1.csv");
    CHECK(r1 == slurp(dir / "r2.csv"));
    CHECK(r1.substr(0, r1.find('\n')) == "p,n,proportion");
    CHECK(std::count(r1.begin(), r1.end(), '\n') == 3);
}

TEST_CASE("failures print one-line coded diagnostics") {
    const fs::path dir = temp_dir();
    write_file(dir / "t.csv", demo_csv());

    const RunResult io = run_cli(dir, "fit --input " + (dir / "missing.csv").string() +
                                          " --response y --lambda 1");
    CHECK(io.code == 1);
    CHECK(io.err.find("error[E_IO]") == 0);
    CHECK(std::count(io.err.begin(), io.err.end(), '\n') == 1);

    write_file(dir / "bad.csv", "x,y\n1,2\n3,huh\n");
    const RunResult parse = run_cli(dir, "fit --input " + (dir / "bad.csv").string() +
                                             " --response y --lambda 1");
    CHECK(parse.code == 1);
    CHECK(parse.err.find("error[E_PARSE]") == 0);
    CHECK(parse.err.find("row 3") != std::string::npos);

    const RunResult col = run_cli(dir, "fit --input " + (dir / "t.csv").string() +
                                           " --response nope --lambda 1");
    CHECK(col.code == 1);
    CHECK(col.err.find("error[E_COLUMN]") == 0);

    const RunResult args = run_cli(dir, "cv --input " + (dir / "t.csv").string() +
                                            " --response y --grid 1:2:5:log");
    CHECK(args.code == 1);
    CHECK(args.err.find("error[E_ARGS]") == 0);

    const RunResult model = run_cli(dir, "predict --model " + (dir / "t.csv").string() +
                                             " --input " + (dir / "t.csv").string());
    CHECK(model.code == 1);
    CHECK(model.err.find("error[E_MODEL]") == 0);

    const RunResult missing_flag = run_cli(dir, "fit --response y --lambda 1");
    CHECK(missing_flag.code == 1);
    CHECK(missing_flag.err.find("error[E_ARGS]") == 0);
}

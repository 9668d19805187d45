// Regenerates data/calibration.json. Rebuild after replacing the file: the
// table is embedded at configure time.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "surfdyn/calibration.hpp"

int main(int argc, char** argv) {
    surfdyn::CalibrationConfig cfg;
    std::string out;
    CLI::App app{"Calibrate C_cal(s) and C_cover(r)"};
    app.add_option("--seed", cfg.seed)->capture_default_str();
    app.add_option("--lk-corpus", cfg.lk_corpus)->capture_default_str();
    app.add_option("--cover-corpus", cfg.cover_corpus)->capture_default_str();
    app.add_option("--max-degree", cfg.max_degree)->capture_default_str();
    app.add_option("--grid", cfg.grid)->capture_default_str();
    app.add_option("--safety", cfg.safety)->capture_default_str();
    app.add_option("--orders", cfg.orders)->capture_default_str();
    app.add_option("-o,--output", out, "Output file (stdout when omitted)");
    CLI11_PARSE(app, argc, argv);

    const std::string text = surfdyn::calibration_to_json(surfdyn::calibrate(cfg));
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out);
        if (!f) {
            std::cerr << "cannot write " << out << "\n";
            return 2;
        }
        f << text;
    }
    return 0;
}

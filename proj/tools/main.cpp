#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rrproc/config.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_error_report(const std::string& out_dir, const std::string& message) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream out(out_dir + "/error.json", std::ios::binary);
    if (out) {
        out << "{\n  \"error\": \"config\",\n  \"detail\": ";
        // minimal JSON string escaping
        out << '"';
        for (char c : message) {
            if (c == '"' || c == '\\')
                out << '\\' << c;
            else if (c == '\n')
                out << "\\n";
            else
                out << c;
        }
        out << "\"\n}\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"renewal-reward tilting toolkit: batch runner"};
    app.set_version_flag("--version", rrproc::kVersion);

    std::string config_path;
    std::string out_dir = ".";
    std::optional<uint64_t> seed_override;
    std::optional<unsigned> threads_override;

    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "output directory for CSV and summary files");
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--threads", threads_override, "override the config worker count");

    CLI11_PARSE(app, argc, argv);

    try {
        rrproc::RunConfig config = rrproc::parse_config(read_file(config_path));
        if (seed_override) config.seed = *seed_override;
        if (threads_override) config.threads = *threads_override;
        rrproc::RunResult result = rrproc::run(config, out_dir);
        for (const std::string& f : result.files_written) std::cout << "wrote " << f << "\n";
        return result.exit_code;
    } catch (const rrproc::ConfigError& e) {
        std::cerr << e.what() << "\n";
        write_error_report(out_dir, e.what());
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        write_error_report(out_dir, e.what());
        return 2;
    }
}

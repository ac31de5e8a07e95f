// rotary-serve: HTTP front end for the web client. Converts uploads in
// memory; see include/rotary/service.hpp for the routes.

#include <iostream>

#include "CLI11.hpp"
#include "rotary/service.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stateless HTTP API for indexed-rotary G-code conversion"};
    app.set_version_flag("--version", rotary::kVersion);

    rotary::service::Config config;
    app.add_option("--host", config.host, "Bind address")->capture_default_str();
    app.add_option("--port", config.port, "TCP port")->capture_default_str()->check(CLI::Range(1, 65535));
    app.add_option("--max-file-bytes", config.max_file_bytes, "Upload size limit in bytes")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    httplib::Server server;
    rotary::service::mount(server, config);
    std::cout << "listening on http://" << config.host << ":" << config.port << "\n" << std::flush;
    if (!server.listen(config.host, config.port)) {
        std::cerr << "error: cannot listen on " << config.host << ":" << config.port << "\n";
        return 2;
    }
    return 0;
}

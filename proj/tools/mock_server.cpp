// Serves the score/compress wire protocol from a fixture file, for manual
// testing and for driving the remote backend without a real model.

#include <chrono>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "sidalign/errors.hpp"
#include "sidalign/fixture_server.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fixture-driven mock scoring/compression server"};
    std::string fixture_path;
    int port = 8080;
    app.add_option("--fixture", fixture_path, "fixture JSON path")->required();
    app.add_option("--port", port, "listen port (0 picks an ephemeral one)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        auto server = sidalign::FixtureServer::from_file(fixture_path);
        server.start(port);
        std::cout << "listening on " << server.base_url() << std::endl;
        while (true) std::this_thread::sleep_for(std::chrono::seconds(3600));
    } catch (const sidalign::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

// speechread-server: JSON/HTTP service over a library directory.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "speechread/service.hpp"

namespace {

speechread::service::Service* running = nullptr;

void on_signal(int)
{
    if (running)
        running->stop();
}

} // namespace

int main(int argc, char** argv)
{
    namespace sr = speechread;
    CLI::App app{"Speechreading practice service"};
    std::optional<std::string> config_file;
    app.add_option("--config", config_file, "JSON config file (bind, port, store, lexicon, max_upload_mb, "
                                            "session_idle_seconds, log_requests)")
        ->check(CLI::ExistingFile);
    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = sr::service::load_config(config_file ? std::optional<sr::fs::path>(*config_file) : std::nullopt);
        sr::LibraryStore store(sr::StoreConfig::in_directory(cfg.store));
        auto lexicon_path = cfg.lexicon.empty() ? store.config().lexicon : cfg.lexicon;
        auto lexicon = std::make_shared<const sr::Lexicon>(sr::load_lexicon(lexicon_path.string()));

        sr::service::Service service(store, lexicon, cfg);
        running = &service;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        std::cerr << "listening on " << cfg.bind << ":" << cfg.port << " (store " << cfg.store.string() << ")\n";
        if (!service.listen()) {
            std::cerr << "error: cannot listen on " << cfg.bind << ":" << cfg.port << "\n";
            return 1;
        }
    } catch (const sr::Error& e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}

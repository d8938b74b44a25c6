// pics-server: HTTP annotation service.
//
//   pics-server --listen 127.0.0.1:8080 --workdir exports/

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>
#include <string>

#include "pics/service.hpp"

#include <httplib.h>

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PICS annotation service"};
  std::string listen = "127.0.0.1:8080";
  std::string workdir;
  pics::service::ServiceConfig config;
  app.add_option("--listen", listen, "host:port to bind (port 0 picks a free port)");
  app.add_option("--workdir", workdir, "directory exports are also written to");
  app.add_option("--event-every", config.event_every, "stream every k-th iteration")
      ->check(CLI::PositiveNumber);
  app.add_flag("!--no-knots", config.stream_knots, "omit knot lists from iteration events");
  app.add_option("--threads", config.threads, "gradient probe threads per session")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "pics-server: --listen expects host:port\n";
    return 2;
  }
  const std::string host = listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "pics-server: bad port in '" << listen << "'\n";
    return 2;
  }
  if (!workdir.empty()) {
    std::filesystem::create_directories(workdir);
    config.workdir = workdir;
  }

  pics::service::AnnotationService service(config);
  httplib::Server server;
  service.mount(server);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  if (port == 0) {
    port = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    port = -1;
  }
  if (port < 0) {
    std::cerr << "pics-server: cannot bind " << listen << "\n";
    return 1;
  }
  std::cout << "listening on " << host << ":" << port << std::endl;
  server.listen_after_bind();
  service.shutdown();
  return 0;
}

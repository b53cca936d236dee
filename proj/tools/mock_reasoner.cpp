// Stand-alone mock reasoner: point --endpoint at it to exercise the remote
// client without a model.

#include <iostream>

#include <CLI11.hpp>

#include "mock_server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mock reasoner endpoint with canned replies"};
  std::string host = "127.0.0.1";
  int port = 8089;
  std::string mode = "ok";
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  app.add_option("--mode", mode, "ok | fail | garbage")->check(CLI::IsMember({"ok", "fail", "garbage"}));
  CLI11_PARSE(app, argc, argv);

  const auto m = mode == "fail" ? topv::mock::Mode::Fail
                 : mode == "garbage" ? topv::mock::Mode::Garbage
                                     : topv::mock::Mode::Ok;
  topv::mock::Server server(m);
  std::cout << "listening on http://" << host << ":" << port << "/ (" << mode << ")" << std::endl;
  try {
    server.run(host, port);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

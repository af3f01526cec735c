// Offline chat-completions endpoint for trying `etr eval` without a provider.
#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "etr/stub_endpoint.hpp"
#include "etr/harness.hpp"

using namespace etr;

namespace {

httplib::Server* running = nullptr;

void stop(int) {
  if (running) running->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scripted chat-completions endpoint"};
  std::string host = "127.0.0.1";
  int port = 8089;
  std::string script;
  std::string problems;
  std::string dump;
  app.add_option("--host", host);
  app.add_option("--port", port)->check(CLI::Range(0, 65535));
  app.add_option("--script", script, "JSON file: {\"default\": ..., \"replies\": {prompt_hash: reply}}")
      ->check(CLI::ExistingFile);
  app.add_option("--fallacious", problems,
                 "Problem file: answer each original-order prompt with its predicted conclusion")
      ->check(CLI::ExistingFile);
  app.add_option("--dump-script", dump, "Write the resulting script and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::shared_ptr<ScriptedEndpoint> endpoint =
        script.empty() ? std::make_shared<ScriptedEndpoint>() : ScriptedEndpoint::load(script);
    if (!problems.empty())
      for (const auto& p : read_problems(problems)) {
        const ThemeMapping m = assign_theme(p);
        endpoint->script(render_prompt(p, m),
                         "Answer: From the premises, we can conclude that " + render_clause(p.predicted, m) + ".");
      }
    if (!dump.empty()) {
      std::ofstream out(dump);
      out << endpoint->to_json().dump(2) << "\n";
      return out ? 0 : 1;
    }

    httplib::Server server;
    mount_stub(server, *endpoint);
    running = &server;
    std::signal(SIGINT, stop);
    std::signal(SIGTERM, stop);
    const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    std::cout << "listening on http://" << host << ":" << bound << "/v1" << std::endl;
    server.listen_after_bind();
    std::cout << "served " << endpoint->calls() << " requests\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// Generates a handful of problems and prints both prompt orders.
#include <iostream>

#include "etr/render.hpp"

using namespace etr;

int main(int argc, char** argv) {
  GenConfig cfg;
  if (argc > 1) cfg.seed = std::stoull(argv[1]);
  for (const auto& p : generate_problems(cfg, 3)) {
    const ThemeMapping m = assign_theme(p);
    std::cout << "# " << p.id << " (" << m.theme.name << ")\n";
    for (const auto& v : p.premises) std::cout << "#   " << print_view(v) << "\n";
    std::cout << "# predicted: " << print_view(p.predicted) << " = " << render_view(p.predicted, m) << "\n\n";
    std::cout << render_prompt(p, m) << "\n\n";
    std::cout << "# reversed\n" << render_prompt(reverse_premises(p), m) << "\n\n";
  }
}

// Runs the inference procedure on a few premise lists and shows each step.
#include <iostream>

#include "etr/engine.hpp"
#include "etr/oracle.hpp"

using namespace etr;

int main() {
  const std::vector<std::vector<std::string>> problems = {
      {"∃a ∃b ∃c ∃d ∃e ∃f {Ace(a*)Has(Mary(),a)Has(c,b)King(b*),Has(John(),d)Has(f,e)Jack(e)Queen(d)}",
       "∃g {King(g*)Has(Sally(),g)}"},
      {"{~visibleToTheNakedEye(moon2()),visibleToTheNakedEye(moon2())}",
       "{visibleToTheNakedEye(asteroidB()),visibleToTheNakedEye(moon2())}"},
      {"{R(x())}^{Q(x())}", "{~R(x())}"},
  };
  for (const auto& texts : problems) {
    std::vector<View> premises;
    for (const auto& t : texts) {
      premises.push_back(parse_view(t));
      std::cout << "  " << print_view(premises.back()) << "\n";
    }
    InferenceTrace trace;
    const View v = what_follows(premises, &trace);
    std::cout << format_trace(trace);
    std::cout << "=> " << print_view(v);
    // The oracle covers monadic views only.
    try {
      std::cout << (entails(premises, v) ? "  (valid)" : "  (not entailed)");
    } catch (const FragmentError&) {
    }
    std::cout << "\n\n";
  }
}

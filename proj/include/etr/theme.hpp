// Thematic framings: a preamble plus pools of entity and attribute phrases.
//
// Theme file format (one entry per line, '#' starts a comment):
//   name = <display name>
//   preamble = <text placed before the premises>
//   object = <entity phrase>          (repeatable)
//   predicate = <attribute phrase>    (repeatable)
//   copula = <attribute> | <positive form> | <negative form>   (optional)
// Without a copula entry an attribute A renders as "is A" / "is not A".
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "etr/config.hpp"

namespace etr {

struct Copula {
  std::string positive;
  std::string negative;
};

struct Theme {
  std::string name;
  std::string preamble;
  std::vector<std::string> objects;
  std::vector<std::string> predicates;
  std::map<std::string, Copula> copulas;

  Copula copula(const std::string& attribute) const {
    if (auto it = copulas.find(attribute); it != copulas.end()) return it->second;
    return {"is " + attribute, "is not " + attribute};
  }
};

class ThemeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Theme parse_theme(std::istream& in) {
  Theme t;
  for (const auto& [key, value] : parse_key_values(in)) {
    if (key == "name") {
      t.name = value;
    } else if (key == "preamble") {
      t.preamble = value;
    } else if (key == "object") {
      t.objects.push_back(value);
    } else if (key == "predicate") {
      t.predicates.push_back(value);
    } else if (key == "copula") {
      const auto a = value.find('|');
      const auto b = a == std::string::npos ? a : value.find('|', a + 1);
      if (b == std::string::npos) throw ThemeError("copula needs three '|'-separated fields: " + value);
      t.copulas[trim(value.substr(0, a))] = {trim(value.substr(a + 1, b - a - 1)), trim(value.substr(b + 1))};
    } else {
      throw ThemeError("unknown theme key: " + key);
    }
  }
  if (t.name.empty() || t.preamble.empty()) throw ThemeError("theme needs a name and a preamble");
  if (t.objects.empty() || t.predicates.empty()) throw ThemeError("theme " + t.name + " has an empty pool");
  for (const auto& [attr, _] : t.copulas)
    if (std::find(t.predicates.begin(), t.predicates.end(), attr) == t.predicates.end())
      throw ThemeError("copula for unknown predicate: " + attr);
  return t;
}

inline Theme parse_theme(const std::string& text) {
  std::istringstream in(text);
  return parse_theme(in);
}

inline Theme load_theme(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ThemeError("cannot open " + path.string());
  return parse_theme(in);
}

/// Every *.theme file in `dir`, sorted by file name.
inline std::vector<Theme> load_theme_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".theme") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Theme> out;
  for (const auto& f : files) out.push_back(load_theme(f));
  return out;
}

/// The twelve shipped themes, in their canonical order. Same content as
/// data/themes/*.theme.
inline const std::vector<Theme>& builtin_themes() {
  static const std::vector<Theme> themes = [] {
    const char* texts[] = {
      R"theme(name = Cards
preamble = I'm playing a card game against the computer. It's an unusual game with an unusual deck of cards. Each card might be multiple colors or multiple shapes, for example. I have some clues about what's going on, and I need to figure some more things out through logical reasoning. Here's what I know so far:
object = the ace
object = the one
object = the two
object = the three
object = the four
object = the five
object = the six
object = the seven
object = the eight
object = the nine
object = the ten
object = the jack
object = the queen
object = the king
predicate = red
predicate = square
predicate = marked
predicate = yellow
predicate = round
predicate = castable
)theme",
      R"theme(name = Elements
preamble = I'm working in a materials science lab and we've gotten some puzzling results. I need to use logical reasoning to figure out what's going on. Here's what I know so far:
object = elementium
object = zycron
object = phantasmite
object = mystarium
object = oblivium
object = luminite
object = darkonium
object = velocium
object = quasarium
object = chronium
object = aetherium
object = voidite
object = pyroflux
object = cryon
object = nebulium
object = solarium
object = eclipsium
object = stellarite
object = fluxium
object = gravitron
object = xylozine
object = ignisium
object = aurorium
object = shadowium
object = plasmor
object = terranite
object = harmonium
object = zenthium
object = celestium
object = radionite
predicate = radioactive
predicate = luminescent
predicate = superconductive
predicate = magnetic
predicate = corrosive
predicate = volatile
predicate = plasma-like
predicate = gravity-enhancing
predicate = dimension-warping
predicate = time-dilating
predicate = self-repairing
predicate = shape-shifting
predicate = anti-matter reactive
predicate = bio-compatible
predicate = crystal-forming
predicate = acidic
predicate = alkaline
predicate = liquid at room temperature
predicate = gaseous under high pressure
predicate = solid in vacuum
predicate = quantum-stable
predicate = emotion-reactive
predicate = thermal-conductive
predicate = electrically insulating
predicate = transparent to visible light
predicate = dark energy absorbing
predicate = neutrino-emitting
predicate = anti-gravity generating
predicate = sound-absorbing
)theme",
      R"theme(name = Planets
preamble = I'm an astronomer studying newly discovered celestial bodies. I've made some observations and I need to use logical reasoning to figure out what's going on. Here's what I know so far:
object = planet X
object = planet Y
object = planet Z
object = asteroid A
object = asteroid B
object = comet 1
object = comet 2
object = moon 1
object = moon 2
object = moon 3
predicate = rocky
predicate = gaseous
predicate = ringed
predicate = within a habitable zone
predicate = orbited by satellites
predicate = in retrograde orbit
predicate = elliptically-orbiting
predicate = visible to the naked eye
predicate = atmospheric
predicate = shielded by a magnetic field
predicate = tidally locked
)theme",
      R"theme(name = Magical creatures
preamble = I'm a magizoologist studying unusual creatures in my sanctuary. I need to understand their behaviors and characteristics through logical reasoning. Here's what I've observed so far:
object = phoenixling
object = shadowdrake
object = moonwolf
object = crystalspider
object = stormgriffin
object = dreamweaver
object = frostwyrm
object = sunlion
object = etherealsnake
object = timefox
predicate = firebreathing
predicate = shadow-walking
predicate = moonlight-glowing
predicate = crystal-forming
predicate = storm-controlling
predicate = dream-affecting
predicate = ice-generating
predicate = light-emitting
predicate = phase-shifting
predicate = time-bending
predicate = telepathic
predicate = aura-healing
predicate = able to turn invisible
predicate = shapeshifting
)theme",
      R"theme(name = Enchanted artifacts
preamble = I'm an arcane researcher cataloging mysterious magical items. I need to understand their properties through careful logical analysis. Here's what I've documented so far:
object = Timekeeper's Compass
object = Void Mirror
object = Dreamcatcher Ring
object = Starlight Pendant
object = Shadow Cloak
object = Crystal Orb
object = Phoenix Feather Quill
object = Moonstone Bracelet
object = Dragon Scale Shield
object = Wisdom Crown
predicate = time-altering
predicate = dimension-bridging
predicate = dreamwalking
predicate = starlight-channeling
predicate = shadow-concealing
predicate = future-seeing
predicate = truth-revealing
predicate = mind-protecting
predicate = magic-nullifying
predicate = wisdom-enhancing
)theme",
      R"theme(name = Quantum particles
preamble = I'm a quantum physicist studying newly theorized particles in an alternate universe. I need to use logic to understand their properties. Here's what we've discovered so far:
object = chronoton
object = memeton
object = gravion
object = psychon
object = dimensium
object = quantix
object = voidon
object = omnion
object = paradox
object = infinitum
predicate = time-reversing
predicate = memory-storing
predicate = gravity-defying
predicate = consciousness-affecting
predicate = dimension-folding
predicate = quantum-entangling
predicate = void-creating
predicate = omnipresent
predicate = paradox-inducing
predicate = energy-producing
)theme",
      R"theme(name = Cyber programs
preamble = I'm a digital archaeologist studying ancient AI programs from a forgotten digital civilization. I need to understand their functions through logical deduction. Here's what I've found:
object = Alpha Mind
object = Beta Sentinel
object = Gamma Weaver
object = Delta Guardian
object = Epsilon Architect
object = Omega Oracle
object = Sigma Hunter
object = Theta Healer
object = Lambda Shifter
object = PI Calculator
predicate = self-evolving
predicate = a network protector
predicate = a data weaver
predicate = a system guarder
predicate = reality-building
predicate = a future predictor
predicate = a virus hunter
predicate = a code healer
predicate = form-shifting
predicate = quantum computing
)theme",
      R"theme(name = Dream entities
preamble = I'm a dream researcher studying beings that appear in shared dreams. I need to understand their nature through logical analysis. Here's what we've observed:
object = morpheus
object = sandman
object = daydream
object = lucidus
object = dreamweaver
object = sleepwalker
object = visionkeeper
object = mindshaper
object = dreamborn
predicate = reality-bending
predicate = nightmare-inducing
predicate = dreamwalking
predicate = memory-weaving
predicate = consciousness-shifting
predicate = time-distorting
predicate = emotion-affecting
predicate = thought-reading
predicate = dream-shaping
predicate = reality-bridging
)theme",
      R"theme(name = Alchemical substances
preamble = I'm an alchemist studying mysterious substances in my laboratory. I need to understand their properties through logical reasoning. Here's what I've discovered:
object = The Philosopher's Stone
object = Universal Solvent
object = vital mercury
object = Prima Materia
object = celestial water
object = astral salt
object = ethereal oil
object = cosmic dust
object = void essence
object = Time Crystal
predicate = transmuting
predicate = corrosive to all materials
predicate = lifegiving
predicate = form-changing
predicate = spirit-affecting
predicate = consciousness-expanding
predicate = reality-altering
predicate = time-bending
predicate = void-creating
predicate = immortality-granting
)theme",
      R"theme(name = Dimensional zones
preamble = I'm a dimensional cartographer mapping regions of parallel universes. I need to understand their properties through logical analysis. Here's what I've mapped:
object = Void Nexus
object = Time Spiral
object = Dream Realm
object = Crystal Dimension
object = Shadow Plane
object = Quantum Zone
object = Infinity Space
object = Chaos Domain
object = Mirror World
object = Probability Realm
predicate = time-warping
predicate = reality-bending
predicate = consciousness-altering
predicate = matter-crystallizing
predicate = light-absorbing
predicate = probability-shifting
predicate = infinity-containing
predicate = chaos-emanating
predicate = reality-reflecting
predicate = possibility-branching
)theme",
      R"theme(name = Psychic powers
preamble = I'm a researcher studying newly discovered psychic abilities. I need to understand their interactions through logical reasoning. Here's what we know:
object = telepathy
object = precognition
object = psychokinesis
object = clairvoyance
object = empathy
object = astral projection
object = mind control
object = psychometry
object = teleportation
object = reality warping
predicate = mindreading
predicate = future-seeing
predicate = matter-moving
predicate = prescient
predicate = emotionally sensitive
predicate = soul-traveling
predicate = imposing
predicate = object-reading
predicate = space-bending
predicate = reality-changing
)theme",
      R"theme(name = Biotech organisms
preamble = I'm a synthetic biology researcher studying advanced bioengineered life forms. I need to understand their capabilities through logical analysis. Here's what we've created:
object = neurovore
object = biomech
object = synthoid
object = nanohive
object = metacell
object = quantumorg
object = chronoplast
object = biomatrix
object = neuronet
object = vitaform
predicate = self-evolving
predicate = machine-integrating
predicate = shapeshifting
predicate = swarm-forming
predicate = consciousness-developing
predicate = quantum-computing
predicate = time-manipulating
predicate = life-creating
predicate = network forming
predicate = energy-converting
)theme",
    };
    std::vector<Theme> v;
    for (const char* t : texts) v.push_back(parse_theme(std::string(t)));
    return v;
  }();
  return themes;
}

inline const Theme& find_theme(const std::string& name) {
  for (const auto& t : builtin_themes())
    if (t.name == name) return t;
  throw ThemeError("unknown theme: " + name);
}

}  // namespace etr

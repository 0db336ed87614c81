#include "tcgan/networks.hpp"

#include "tcgan/errors.hpp"

namespace tcgan {

GeneratorPair::GeneratorPair(const GeneratorArch& arch, std::uint64_t s1, std::uint64_t s2, double init_std,
                             bool allow_identical)
    : g1(arch, s1, init_std), g2(arch, s2, init_std), seed1(s1), seed2(s2) {
  if (s1 == s2 && !allow_identical) {
    throw ConfigError("the two generators need distinct initialisation seeds");
  }
}

ParamList<float> GeneratorPair::params() const {
  ParamList<float> out = g1.params("g1");
  append(out, g2.params("g2"));
  return out;
}

DiscriminatorPair::DiscriminatorPair(const DiscriminatorArch& arch, std::uint64_t s1, std::uint64_t s2,
                                     double init_std)
    : d1(arch, s1, init_std), d2(arch, s2, init_std) {}

ParamList<float> DiscriminatorPair::params() const {
  ParamList<float> out = d1.params("d1");
  append(out, d2.params("d2"));
  return out;
}

}  // namespace tcgan

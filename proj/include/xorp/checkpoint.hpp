// Parameter dump: a `p,h,activation,seed` header line, the header values, then every entry
// of W1, b1, W2, b2 in row-major order, one per line, at full double precision.
#ifndef XORP_CHECKPOINT_HPP
#define XORP_CHECKPOINT_HPP

#include "xorp/activations.hpp"
#include "xorp/network.hpp"

#include <cstdint>
#include <iosfwd>

namespace xorp {

struct Checkpoint {
  int p = 0;
  int hidden = 0;
  ActivationKind activation = ActivationKind::Elu;
  std::uint64_t seed = 0;
  MlpParamsd params;
};

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
/// Throws std::runtime_error on a malformed or truncated dump.
Checkpoint read_checkpoint(std::istream& in);

}  // namespace xorp

#endif  // XORP_CHECKPOINT_HPP

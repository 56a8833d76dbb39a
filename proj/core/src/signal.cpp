#include "saiplab/signal.hpp"

#include <string>

#include "saiplab/errors.hpp"

namespace saiplab {

Signal Signal::vector(Eigen::VectorXd v) {
  Signal s;
  s.height = static_cast<int>(v.size());
  s.width = 1;
  s.data = std::move(v);
  return s;
}

Signal Signal::image(Eigen::VectorXd v, int height, int width) {
  if (height < 0 || width < 0 || static_cast<long>(height) * width != v.size())
    throw ContractViolation("Signal::image: data length must equal height*width");
  Signal s;
  s.height = height;
  s.width = width;
  s.data = std::move(v);
  return s;
}

void ensure_finite(const Eigen::VectorXd& v, const char* context) {
  if (!v.allFinite()) throw ContractViolation(std::string(context) + ": non-finite entries");
}

void ensure_finite(const Signal& s, const char* context) { ensure_finite(s.data, context); }

}  // namespace saiplab

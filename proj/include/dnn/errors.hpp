#ifndef DNN_ERRORS_HPP
#define DNN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dnn {

/// Malformed or unusable input data (files, label sets, splits).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration. The CLI maps this to exit status 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dnn

#endif  // DNN_ERRORS_HPP

#ifndef DNN_DNN_HPP
#define DNN_DNN_HPP

#include "dnn/data_io.hpp"
#include "dnn/inference.hpp"
#include "dnn/knn.hpp"
#include "dnn/mrf.hpp"
#include "dnn/oracle.hpp"
#include "dnn/prediction.hpp"
#include "dnn/weights.hpp"

#endif  // DNN_DNN_HPP

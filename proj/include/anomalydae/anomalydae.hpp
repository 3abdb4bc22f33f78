#pragma once

// Umbrella header.
#include "anomalydae/activation.hpp"
#include "anomalydae/checkpoint.hpp"
#include "anomalydae/errors.hpp"
#include "anomalydae/evaluation.hpp"
#include "anomalydae/gradcheck.hpp"
#include "anomalydae/io.hpp"
#include "anomalydae/matrix.hpp"
#include "anomalydae/model.hpp"
#include "anomalydae/network.hpp"
#include "anomalydae/row_mask.hpp"
#include "anomalydae/synthetic.hpp"
#include "anomalydae/tape.hpp"
#include "anomalydae/training.hpp"

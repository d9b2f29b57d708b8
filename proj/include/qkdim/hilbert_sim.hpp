#pragma once

#include "qkdim/hilbert/linalg.hpp"
#include "qkdim/hilbert/protocol.hpp"
#include "qkdim/hilbert/random.hpp"
#include "qkdim/hilbert/tensor.hpp"
#include "qkdim/hilbert/theorem1.hpp"
#include "qkdim/hilbert/verify.hpp"

#pragma once

#include "sqpn/algebra.hpp"
#include "sqpn/model.hpp"
#include "sqpn/inference.hpp"
#include "sqpn/abstraction.hpp"
#include "sqpn/propagate.hpp"
#include "sqpn/oracle.hpp"
#include "sqpn/format.hpp"

#pragma once

#include "hypstab/linalg.hpp"
#include "hypstab/errors.hpp"
#include "hypstab/geometry.hpp"
#include "hypstab/optim.hpp"
#include "hypstab/stability.hpp"
#include "hypstab/tree.hpp"
#include "hypstab/embedding.hpp"
#include "hypstab/svm.hpp"
#include "hypstab/io.hpp"
#include "hypstab/cli.hpp"

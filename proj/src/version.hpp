#pragma once

#define DPC_VERSION_MAJOR 0
#define DPC_VERSION_MINOR 1
#define DPC_VERSION_PATCH 0
#define DPC_VERSION_STRING "0.1.0"

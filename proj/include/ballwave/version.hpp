#pragma once

#define BALLWAVE_VERSION "0.1.0"

// SPDX-License-Identifier: Apache-2.0
//
// mimo-ofdm-sim: link-level simulator for CFO/SFO sensitivity of MIMO-OFDM space-time schemes
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#ifndef MIMO_OFDM_HPP
#define MIMO_OFDM_HPP

#include "mimo_ofdm/channel.hpp"
#include "mimo_ofdm/coding.hpp"
#include "mimo_ofdm/config.hpp"
#include "mimo_ofdm/error.hpp"
#include "mimo_ofdm/harness.hpp"
#include "mimo_ofdm/link.hpp"
#include "mimo_ofdm/mapping.hpp"
#include "mimo_ofdm/receiver.hpp"
#include "mimo_ofdm/rng.hpp"
#include "mimo_ofdm/stbc.hpp"

#endif // MIMO_OFDM_HPP

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mr2/common.hpp"
#include "mr2/pathcore.hpp"

namespace mr2 {

/// First-order radio model constants.
struct EnergyParams {
  double eElec = 50e-9;       ///< J/bit, transmitter or receiver circuitry
  double epsAmp = 100e-12;    ///< J/bit/m^2, transmit amplifier
  double bitrate = 250000.0;  ///< bit/s
  double initialEnergy = 2.0; ///< J per node
  double sleepFactor = 0.01;  ///< sleep power as a fraction of reception power

  /// Throws InvalidParameter unless every field is positive.
  void validate() const;
  /// Power drawn while receiving continuously at the full bitrate.
  double receptionPower() const { return eElec * bitrate; }
  double idlePower() const { return receptionPower(); }
  double sleepPower() const { return receptionPower() * sleepFactor; }
  double airtime(std::uint32_t bits) const { return bits / bitrate; }
};

/// E_elec*k + eps_amp*k*d^2.
double energyTx(double bits, double distance, const EnergyParams &params);
/// E_elec*k.
double energyRx(double bits, const EnergyParams &params);
/// Energy spent asleep for `duration` seconds.
double sleepDrain(double duration, const EnergyParams &params);

/// Per-node energy accounts for one replication.
///
/// Idle and sleep drain are integrated lazily: every interaction with a node
/// first calls accrue(now), which charges the radio state since the previous
/// accrual. While the radio is busy (transmitting or receiving) no idle drain
/// accrues; the tx/rx charge covers that time. A node whose remaining energy
/// reaches zero is dead from that instant.
class EnergyLedger {
public:
  struct Account {
    double consumedTx = 0.0;
    double consumedRx = 0.0;
    double consumedSleep = 0.0;
    double consumedIdle = 0.0;
    double remaining = 0.0;
    bool alive = true;
    bool asleep = false;
    bool unlimited = false;
    int busy = 0;
    SimTime lastAccrual = 0.0;
    SimTime deathTime = -1.0;
  };

  EnergyLedger(std::size_t nodeCount, const EnergyParams &params);

  /// Nodes with unlimited energy are never charged (e.g. a mains-powered sink).
  void setUnlimited(NodeId node);

  const Account &account(NodeId node) const { return m_accounts.at(node); }
  const EnergyParams &params() const noexcept { return m_params; }
  std::size_t size() const noexcept { return m_accounts.size(); }

  /// Integrates idle/sleep drain up to `now`. Returns alive status.
  bool accrue(NodeId node, SimTime now);
  /// Charges a transmission. Returns false (and kills the node) when the
  /// remaining energy cannot cover it; nothing is charged in that case.
  bool chargeTx(NodeId node, double joules, MessageClass cls, SimTime now);
  /// Charges a reception. A node that cannot cover it spends what is left and
  /// dies; returns false then.
  bool chargeRx(NodeId node, double joules, MessageClass cls, SimTime now);

  void beginBusy(NodeId node, SimTime now);
  void endBusy(NodeId node, SimTime now);
  void setAsleep(NodeId node, bool asleep, SimTime now);

  bool alive(NodeId node) const { return m_accounts.at(node).alive; }
  double remaining(NodeId node) const { return m_accounts.at(node).remaining; }

  double totalConsumed() const;
  double totalTxRx() const;
  /// Tx+Rx energy attributed to a message class, summed over nodes.
  double classEnergy(MessageClass cls) const {
    return m_classEnergy[std::size_t(cls)];
  }

  /// Largest |initial - consumed - remaining| / initial over limited nodes.
  double conservationError() const;

private:
  void kill(Account &account, SimTime when);

  EnergyParams m_params;
  std::vector<Account> m_accounts;
  std::array<double, kMessageClassCount> m_classEnergy{};
};

} // namespace mr2

#include "mr2/energy.hpp"

#include <algorithm>
#include <cmath>

namespace mr2 {

void EnergyParams::validate() const {
  if (!(eElec > 0.0) || !(epsAmp > 0.0) || !(bitrate > 0.0) ||
      !(initialEnergy > 0.0) || !(sleepFactor > 0.0))
    throw InvalidParameter("energy parameters must all be positive");
}

double energyTx(double bits, double distance, const EnergyParams &params) {
  if (bits < 0.0 || distance < 0.0)
    throw InvalidParameter("energyTx needs non-negative bits and distance");
  return params.eElec * bits + params.epsAmp * bits * distance * distance;
}

double energyRx(double bits, const EnergyParams &params) {
  if (bits < 0.0)
    throw InvalidParameter("energyRx needs non-negative bits");
  return params.eElec * bits;
}

double sleepDrain(double duration, const EnergyParams &params) {
  if (duration < 0.0)
    throw InvalidParameter("sleepDrain needs a non-negative duration");
  return duration * params.sleepPower();
}

EnergyLedger::EnergyLedger(std::size_t nodeCount, const EnergyParams &params)
    : m_params(params), m_accounts(nodeCount) {
  params.validate();
  for (auto &account : m_accounts)
    account.remaining = params.initialEnergy;
}

void EnergyLedger::setUnlimited(NodeId node) {
  m_accounts.at(node).unlimited = true;
}

void EnergyLedger::kill(Account &account, SimTime when) {
  account.alive = false;
  account.deathTime = when;
}

bool EnergyLedger::accrue(NodeId node, SimTime now) {
  Account &a = m_accounts.at(node);
  if (!a.alive) {
    a.lastAccrual = now;
    return false;
  }
  const double dt = now - a.lastAccrual;
  if (dt > 0.0 && a.busy == 0 && !a.unlimited) {
    const double power = a.asleep ? m_params.sleepPower() : m_params.idlePower();
    double drain = power * dt;
    double &bucket = a.asleep ? a.consumedSleep : a.consumedIdle;
    if (drain >= a.remaining) {
      const SimTime death = a.lastAccrual + a.remaining / power;
      bucket += a.remaining;
      a.remaining = 0.0;
      kill(a, death);
    } else {
      bucket += drain;
      a.remaining -= drain;
    }
  }
  a.lastAccrual = now;
  return a.alive;
}

bool EnergyLedger::chargeTx(NodeId node, double joules, MessageClass cls,
                            SimTime now) {
  if (!accrue(node, now))
    return false;
  Account &a = m_accounts[node];
  if (a.unlimited)
    return true;
  if (joules > a.remaining) {
    kill(a, now);
    return false;
  }
  a.consumedTx += joules;
  a.remaining -= joules;
  m_classEnergy[std::size_t(cls)] += joules;
  return true;
}

bool EnergyLedger::chargeRx(NodeId node, double joules, MessageClass cls,
                            SimTime now) {
  if (!accrue(node, now))
    return false;
  Account &a = m_accounts[node];
  if (a.unlimited)
    return true;
  const double paid = std::min(joules, a.remaining);
  a.consumedRx += paid;
  a.remaining -= paid;
  m_classEnergy[std::size_t(cls)] += paid;
  if (paid < joules || a.remaining <= 0.0) {
    a.remaining = 0.0;
    kill(a, now);
    return false;
  }
  return true;
}

void EnergyLedger::beginBusy(NodeId node, SimTime now) {
  accrue(node, now);
  ++m_accounts[node].busy;
}

void EnergyLedger::endBusy(NodeId node, SimTime now) {
  Account &a = m_accounts.at(node);
  a.busy = std::max(0, a.busy - 1);
  a.lastAccrual = std::max(a.lastAccrual, now);
}

void EnergyLedger::setAsleep(NodeId node, bool asleep, SimTime now) {
  accrue(node, now);
  m_accounts[node].asleep = asleep;
}

double EnergyLedger::totalConsumed() const {
  double total = 0.0;
  for (const auto &a : m_accounts)
    total += a.consumedTx + a.consumedRx + a.consumedSleep + a.consumedIdle;
  return total;
}

double EnergyLedger::totalTxRx() const {
  double total = 0.0;
  for (const auto &a : m_accounts)
    total += a.consumedTx + a.consumedRx;
  return total;
}

double EnergyLedger::conservationError() const {
  double worst = 0.0;
  for (const auto &a : m_accounts) {
    if (a.unlimited)
      continue;
    const double sum = a.consumedTx + a.consumedRx + a.consumedSleep +
                       a.consumedIdle + a.remaining;
    worst = std::max(worst, std::abs(sum - m_params.initialEnergy) /
                                m_params.initialEnergy);
  }
  return worst;
}

} // namespace mr2

#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agora/bus.hpp"
#include "agora/fixed.hpp"
#include "agora/market.hpp"

namespace agora {

enum class TransferReason { BidSettlement, Grant, Manual };

inline const char* to_string(TransferReason r) {
    switch (r) {
        case TransferReason::BidSettlement: return "BID_SETTLEMENT";
        case TransferReason::Grant: return "GRANT";
        case TransferReason::Manual: return "MANUAL";
    }
    return "?";
}

struct Transfer {
    std::string transfer_id;
    std::string from;
    std::string to;
    Credit amount;
    TransferReason reason = TransferReason::Manual;
    double at = 0;
};

// Central ledger. All credits live here; every mutation is an append-only
// journal entry, and replaying the journal from genesis reproduces every
// balance exactly. The reserve account funds grants so that the sum of all
// balances is constant forever.
class Bank : public ServiceBase {
public:
    static constexpr const char* kReserve = "reserve";

    Bank(Context& ctx, Credit endowment, std::string name = "bank")
        : ServiceBase(ctx, std::move(name)), endowment_(endowment) {
        balances_[kReserve] = endowment_;
        append_journal(Json{{"endowment", endowment_.str()}, {"kind", "genesis"}});
    }

    // --- ledger operations ---

    Credit open_account(const std::string& account_id, Credit initial_grant) {
        if (account_id.empty()) fail("bad_account", "account id required");
        if (balances_.count(account_id))
            fail("duplicate_account", "account already exists: " + account_id);
        if (initial_grant > balances_[kReserve])
            fail("reserve_exhausted", "reserve cannot fund grant of " + initial_grant.str());
        balances_[kReserve] -= initial_grant;
        balances_[account_id] = initial_grant;
        append_journal(Json{{"account", account_id},
                            {"at", ctx_.now()},
                            {"grant", initial_grant.str()},
                            {"id", next_transfer_id()},
                            {"kind", "open"}});
        return initial_grant;
    }

    Transfer settle_bid(const Bid& bid, const std::string& provider_account) {
        return transfer(bid.bidder, provider_account, bid.amount, TransferReason::BidSettlement);
    }

    Transfer transfer(const std::string& from, const std::string& to, Credit amount,
                      TransferReason reason) {
        if (amount.is_zero()) fail("bad_transfer", "transfer amount must be > 0");
        if (from == to) fail("bad_transfer", "transfer endpoints must differ");
        auto from_it = balances_.find(from);
        if (from_it == balances_.end()) fail("unknown_account", "no such account: " + from);
        auto to_it = balances_.find(to);
        if (to_it == balances_.end()) fail("unknown_account", "no such account: " + to);
        if (amount > from_it->second)
            fail("insufficient_funds", from + " holds " + from_it->second.str() +
                                           ", cannot cover " + amount.str());
        from_it->second -= amount;
        try {
            if (test_fault_after_debit) {
                test_fault_after_debit = false;
                fail("injected_fault", "fault injected between debit and credit");
            }
            to_it->second += amount;
        } catch (...) {
            from_it->second += amount;  // roll the debit back; no partial writes
            throw;
        }
        Transfer t{next_transfer_id(), from, to, amount, reason, ctx_.now()};
        append_journal(Json{{"amount", t.amount.str()},
                            {"at", t.at},
                            {"from", t.from},
                            {"id", t.transfer_id},
                            {"kind", "transfer"},
                            {"reason", to_string(t.reason)},
                            {"to", t.to}});
        return t;
    }

    Credit balance(const std::string& account_id) const {
        auto it = balances_.find(account_id);
        if (it == balances_.end()) fail("unknown_account", "no such account: " + account_id);
        return it->second;
    }

    bool has_account(const std::string& account_id) const { return balances_.count(account_id) > 0; }

    Credit total() const {
        Credit sum;
        for (auto& [id, b] : balances_) sum += b;
        return sum;
    }

    const std::vector<std::string>& journal() const { return journal_; }

    // Streams new journal entries to a file as they happen.
    void attach_journal_file(const std::string& path) {
        journal_file_.emplace(path, std::ios::out | std::ios::trunc);
        if (!*journal_file_) fail("io_error", "cannot open journal file: " + path);
        for (const auto& line : journal_) *journal_file_ << line << '\n';
        journal_file_->flush();
    }

    // Rebuilds a bank from a persisted journal.
    static Bank replay(Context& ctx, const std::vector<std::string>& lines,
                       std::string name = "bank") {
        if (lines.empty()) fail("bad_journal", "journal has no genesis entry");
        Json genesis = Json::parse(lines.front());
        if (genesis.value("kind", "") != "genesis") fail("bad_journal", "first entry must be genesis");
        Bank bank(ctx, Credit::parse(genesis.at("endowment").get<std::string>()), std::move(name));
        for (size_t i = 1; i < lines.size(); ++i) {
            Json j = Json::parse(lines[i]);
            std::string kind = j.value("kind", "");
            if (kind == "open") {
                Credit grant = Credit::parse(j.at("grant").get<std::string>());
                std::string account = j.at("account").get<std::string>();
                bank.balances_[Bank::kReserve] -= grant;
                bank.balances_[account] = grant;
            } else if (kind == "transfer") {
                Credit amount = Credit::parse(j.at("amount").get<std::string>());
                bank.balances_.at(j.at("from").get<std::string>()) -= amount;
                bank.balances_.at(j.at("to").get<std::string>()) += amount;
            } else {
                fail("bad_journal", "unknown journal entry kind: " + kind);
            }
            bank.journal_.push_back(lines[i]);
        }
        bank.transfer_seq_ = lines.size() - 1;  // ids keep counting after replay
        return bank;
    }

    // Test hook: makes the next transfer throw between debit and credit.
    bool test_fault_after_debit = false;

protected:
    void handle(const Envelope& env) override {
        try {
            if (env.msg_type == "bank.open") {
                std::string account = env.body.at("account").get<std::string>();
                Credit grant = Credit::parse(env.body.at("grant").get<std::string>());
                open_account(account, grant);
                reply(env, Json{{"account", account}, {"balance", balance(account).str()}});
            } else if (env.msg_type == "bank.settle") {
                Bid bid;
                bid.bid_id = env.body.at("bid_id").get<std::string>();
                bid.bidder = env.body.at("bidder").get<std::string>();
                bid.amount = Credit::parse(env.body.at("amount").get<std::string>());
                bid.duration = 1;  // not relevant to settlement
                Transfer t = settle_bid(bid, env.body.at("provider").get<std::string>());
                reply(env, Json{{"amount", t.amount.str()},
                                {"bidder_balance", balance(t.from).str()},
                                {"provider_balance", balance(t.to).str()},
                                {"transfer_id", t.transfer_id}});
            } else if (env.msg_type == "bank.balance") {
                std::string account = env.body.at("account").get<std::string>();
                reply(env, Json{{"account", account}, {"balance", balance(account).str()}});
            } else {
                reply_error(env, "bad_request", "unknown message type: " + env.msg_type);
            }
        } catch (const Error& e) {
            reply_error(env, e.code(), e.what());
        } catch (const Json::exception& e) {
            reply_error(env, "bad_request", e.what());
        }
    }

private:
    std::string next_transfer_id() { return "tx-" + std::to_string(++transfer_seq_); }

    void append_journal(const Json& entry) {
        journal_.push_back(entry.dump());
        if (journal_file_) {
            *journal_file_ << journal_.back() << '\n';
            journal_file_->flush();
        }
    }

    Credit endowment_;
    std::map<std::string, Credit> balances_;
    std::vector<std::string> journal_;
    std::optional<std::ofstream> journal_file_;
    uint64_t transfer_seq_ = 0;
};

}  // namespace agora

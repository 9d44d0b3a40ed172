#!/usr/bin/env python3
"""Regenerates the bundled fixtures. Output is fully determined by SEED."""

import json
import random
from pathlib import Path

import numpy as np

SEED = 20240607
HERE = Path(__file__).resolve().parent
TOY = HERE / "toy"

TAGS = [
    "Bonds", "Forward", "Funds", "Future", "MMIs", "Option", "Stocks", "Swap",
    "Equity Index", "Credit Index", "Securities restrictions", "Parametric schedules",
    "Debt pricing and yields", "Credit Events", "Stock Corporation",
    "Central Securities Depository", "Regulatory Agency",
]

VOCAB = {
    "Bonds": ["coupon", "debenture", "maturity", "principal", "bondholder", "indenture",
              "callable", "redemption", "treasury", "municipal", "subordinated", "trustee"],
    "Swap": ["swap", "notional", "floating", "leg", "counterparty", "payer", "receiver",
             "basis", "reset", "netting", "overnight", "currency"],
    "Stocks": ["share", "dividend", "equity", "shareholder", "common", "preferred",
               "voting", "listed", "stockholder", "ordinary", "buyback", "registrar"],
}
FILLER = ["the", "of", "and", "will", "be", "to", "in", "on", "each", "any", "such", "by"]
TEMPLATES = [
    "the {0} of the {1} will be paid on each {2} date.",
    "holders of the {0} may elect {1} subject to the {2} provisions.",
    "any {0} under the {1} shall be determined by the {2} agent.",
    "the issuer will notify each {0} of the {1} and the {2}.",
    "in the event of a {0} default the {1} and {2} terms apply.",
    "such {0} will be {1} by reference to the {2} schedule.",
]

TERMS = {
    "Bonds": ["callable debenture", "subordinated debenture", "treasury coupon", "municipal bond",
              "coupon redemption", "indenture trustee", "principal maturity", "bondholder coupon",
              "callable bond", "treasury maturity", "subordinated principal", "debenture indenture",
              "municipal maturity", "redemption trustee", "coupon debenture", "bondholder principal",
              "callable treasury", "indenture maturity", "municipal coupon", "trustee redemption"],
    "Swap": ["floating leg", "payer swap", "receiver swap", "basis swap", "overnight swap",
             "currency swap", "notional reset", "swap counterparty", "netting agreement swap",
             "floating reset", "payer leg", "receiver leg", "basis leg", "currency basis",
             "overnight reset", "notional swap", "counterparty netting", "floating notional",
             "currency leg", "payer notional"],
    "Stocks": ["common share", "preferred share", "voting share", "ordinary share", "listed equity",
               "dividend equity", "shareholder dividend", "stockholder voting", "share buyback",
               "equity registrar", "common equity", "preferred dividend", "ordinary dividend",
               "listed share", "voting stockholder", "buyback equity", "registrar shareholder",
               "common stockholder", "preferred equity", "ordinary equity"],
}


def ontology():
    base = "http://toy.example/ontology/"
    recs = []

    def rec(name, label, definition, subclasses=(), note=None, synonyms=(), instances=()):
        r = {"iri": base + name, "label": label, "definition": definition,
             "subclasses": [base + s for s in subclasses]}
        if note:
            r["explanatory_note"] = note
        if synonyms:
            r["synonyms"] = list(synonyms)
        if instances:
            r["instances"] = [base + i for i in instances]
        recs.append(r)

    rec("Bonds", "Bonds", "A bond is a debt security under which the issuer owes the holder a debt and pays coupon interest until maturity.",
        ["CorporateBond", "GovernmentBond", "EquityLinkedNote"], note="Bonds are governed by an indenture.")
    rec("CorporateBond", "corporate bond", "A corporate bond is a bond issued by a corporation to raise financing; principal is repaid at maturity.",
        ["SeniorSecuredBond", "SubordinatedBond"], synonyms=["corporate debenture"])
    rec("SeniorSecuredBond", "senior secured bond", "A senior secured bond is backed by collateral and ranks ahead of other debt of the issuer.")
    rec("SubordinatedBond", "subordinated bond", "A subordinated bond ranks after senior debt in a liquidation of the issuer.",
        ["PerpetualDecoyNote"])
    rec("PerpetualDecoyNote", "perpetual decoy note", "DECOY: a perpetual note three levels below the seed; it must never be mined at depth two.")
    rec("GovernmentBond", "government bond", "A government bond is issued by a national government and pays periodic coupons.",
        ["MunicipalBond"], synonyms=["sovereign bond", "treasury"])
    rec("MunicipalBond", "municipal bond", "A municipal bond is issued by a local authority to fund public projects.")
    rec("EquityLinkedNote", "equity-linked note", "An equity-linked note is a debt instrument whose return depends on an underlying equity.")
    rec("Swap", "Swap", "A swap is a derivative in which two counterparties exchange cash flows of one leg against another.",
        ["InterestRateSwap", "CurrencySwap"], note="Payments are computed on a notional amount.")
    rec("InterestRateSwap", "interest rate swap", "An interest rate swap exchanges a fixed leg against a floating leg on the same notional.",
        ["BasisSwap", "OvernightIndexSwap"], synonyms=["IRS"])
    rec("BasisSwap", "basis swap", "A basis swap exchanges two floating legs referencing different rates.")
    rec("OvernightIndexSwap", "overnight index swap", "An overnight index swap references a compounded overnight rate on its floating leg.")
    rec("CurrencySwap", "currency swap", "A currency swap exchanges principal and interest in one currency for another currency.",
        ["CrossCurrencyBasisSwap", "MissingConcept"])
    rec("CrossCurrencyBasisSwap", "cross currency basis swap", "A cross currency basis swap exchanges floating legs in two currencies with a basis spread.")
    rec("Stocks", "Stocks", "A stock is an equity security that represents a share of ownership in a corporation.",
        ["CommonStock", "PreferredStock"], note="Stockholders may receive dividends.")
    rec("CommonStock", "common stock", "Common stock carries voting rights and a residual claim on the assets of the issuer.",
        ["VotingShare", "EquityLinkedNote"], instances=["AcmeOrdinaryShare"])
    rec("VotingShare", "voting share", "A voting share entitles the shareholder to vote at general meetings.")
    rec("AcmeOrdinaryShare", "acme ordinary share", "An ordinary share issued by Acme, reachable only as an instance.")
    rec("PreferredStock", "preferred stock", "Preferred stock pays a fixed dividend before any dividend on common stock.",
        ["CumulativePreferredStock"], synonyms=["preference share"])
    rec("CumulativePreferredStock", "cumulative preferred stock", "Cumulative preferred stock accrues unpaid dividends for later payment.")
    return recs


def prospectus(rng):
    lines = []
    tags = list(VOCAB)
    for i in range(200):
        tag = tags[i % 3]
        words = rng.sample(VOCAB[tag], 3)
        lines.append(rng.choice(TEMPLATES).format(*words))
    return lines


def sentence_vectors(nrng, terms):
    dim = 768
    dims = {tag: nrng.choice(np.arange(64, dim), size=16, replace=False) for tag in VOCAB}
    rows = {}
    misleading = set()
    for tag, ts in terms.items():
        for j, t in enumerate(ts):
            # Every fifth term carries another class's signal.
            signal_tag = tag if j % 5 != 4 else list(VOCAB)[(list(VOCAB).index(tag) + 1) % 3]
            if signal_tag != tag:
                misleading.add(t)
            v = nrng.normal(0.0, 0.1, dim)
            v[dims[signal_tag]] += 0.05
            rows[t] = v
    for name in TAGS:
        v = nrng.normal(0.0, 0.1, dim)
        if name in dims:
            v[dims[name]] += 0.3
        rows[name.lower()] = v
    return rows


def write_vectors(path, rows):
    with open(path, "w") as f:
        f.write(f"{len(rows)} 768\n")
        for key in sorted(rows):
            vals = " ".join(f"{x:.4f}" for x in rows[key])
            f.write(f"{key.replace(' ', chr(0x2581))} {vals}\n")


def two_cluster(rng):
    a = [f"a{i}" for i in range(1, 6)]
    b = [f"b{i}" for i in range(1, 6)]
    lines = []
    for i in range(400):
        pool = a if i % 2 == 0 else b
        lines.append(" ".join(rng.choice(pool) for _ in range(8)))
    return lines


def main():
    rng = random.Random(SEED)
    nrng = np.random.default_rng(SEED)
    TOY.mkdir(exist_ok=True)
    with open(TOY / "ontology.jsonl", "w") as f:
        for r in ontology():
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    (TOY / "prospectus.txt").write_text("\n".join(prospectus(rng)) + "\n")
    with open(TOY / "terms.tsv", "w") as f:
        f.write("term\tlabel\n")
        for tag, ts in TERMS.items():
            for t in ts:
                f.write(f"{t}\t{tag}\n")
    write_vectors(TOY / "sentence_vectors.vec", sentence_vectors(nrng, TERMS))
    (HERE / "two_cluster.txt").write_text("\n".join(two_cluster(rng)) + "\n")


if __name__ == "__main__":
    main()

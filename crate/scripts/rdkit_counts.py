"""Regenerate crates/core/tests/fixtures/rdkit_counts.tsv.

    vscreen gen-library --seed 1234 --count 1000 -o /tmp/fx.smi
    python3 scripts/rdkit_counts.py /tmp/fx.smi > crates/core/tests/fixtures/rdkit_counts.tsv
"""
import sys

from rdkit import Chem, RDLogger

RDLogger.DisableLog("rdApp.*")
print("id\tsmiles\tatoms\tbonds")
for line in open(sys.argv[1]):
    smiles, ident = line.rstrip("\n").split("\t")
    mol = Chem.MolFromSmiles(smiles) or Chem.MolFromSmiles(smiles, sanitize=False)
    print(f"{ident}\t{smiles}\t{mol.GetNumAtoms()}\t{mol.GetNumBonds()}")

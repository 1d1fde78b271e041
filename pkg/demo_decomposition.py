#!/usr/bin/env python3
"""
Demo script for gammakit
Walks through point membership, the layered certificate and the canonical
decomposition on generated instances
"""

import numpy as np
from rich.console import Console
from rich.table import Table

from src.decomposition import canonical_decompose, verify_decomposition
from src.export_utils import render_certificate_table, render_decomposition_table
from src.generators import GeneratorSpec, generate
from src.operator_core import certify_gamma_contraction, joint_spectrum
from src.scalar_geometry import AlphaGrid, GammaPoint, membership_report, scalar_pencil_scan

console = Console()

GRID = AlphaGrid.uniform(rings=4, angles=64)


def demo_membership():
    """Classify a few points of C^2 and C^3"""
    console.print("\n📍 Membership Demo", style="bold blue")
    console.print("=" * 50)

    examples = [
        ("Double root on the circle", [2, 1]),
        ("Roots 1 and 2", [3, 2]),
        ("Origin of C^3", [0, 0, 0]),
        ("Triple root on the circle", [3, 3, 1]),
        ("Sharp middle bound", [4, 6, 4, 1]),
    ]

    table = Table(title="Points", expand=True, show_lines=True)
    for column in ("Point", "Closed", "Open", "Boundary", "Certified pencil min"):
        table.add_column(column, overflow="fold")

    for label, coords in examples:
        point = GammaPoint.from_coordinates(coords)
        verdicts = membership_report(point)
        pencil = scalar_pencil_scan(point, GRID).certified_minimum
        table.add_row(
            f"{label} {tuple(coords)}",
            *("✅" if verdicts[r].inside else "❌" for r in ("closed", "open", "boundary")),
            f"{pencil:.4g}",
        )
    console.print(table)


def demo_certificates():
    """Certify one instance of each generator model"""
    console.print("\n🔎 Certificate Demo", style="bold blue")
    console.print("=" * 50)

    for model in ("normal_interior", "cnu_jordan", "outside_perturbed"):
        instance = generate(GeneratorSpec(seed=7, n=3, dim=3, model=model))
        console.print(f"\n📋 {model} (label: {instance.ground_truth['label']})", style="bold cyan")
        report = certify_gamma_contraction(instance.tuple, grid=GRID, vn_trials=2)
        render_certificate_table(report)


def demo_decomposition():
    """Split a direct sum back into its unitary and cnu parts"""
    console.print("\n🧩 Decomposition Demo", style="bold blue")
    console.print("=" * 50)

    instance = generate(GeneratorSpec(seed=3, n=3, dim=5, model="mixed_direct_sum"))
    console.print(f"Generated a 5-dimensional direct sum with k = {instance.ground_truth['k']}", style="yellow")

    result = canonical_decompose(instance.tuple, grid=GRID, vn_trials=2)
    render_decomposition_table(result, verify_decomposition(instance.tuple, result))

    if result.k:
        spectrum = joint_spectrum(result.unitary_part).points
        console.print("Joint spectrum of the unitary part:", style="bold")
        for row in spectrum:
            moduli = ", ".join(f"{abs(z):.6f}" for z in row)
            console.print(f"   |s_i|, |p| = {moduli}", style="dim")
        console.print(f"   max | |p| - 1 | = {np.max(np.abs(np.abs(spectrum[:, -1]) - 1)):.2e}", style="dim")


def main():
    """Run the demo"""
    console.print("🚀 gammakit Demo", style="bold magenta")
    console.print("Membership, certification and canonical decomposition", style="dim")

    try:
        demo_membership()
        demo_certificates()
        demo_decomposition()

        console.print("\n✅ Demo completed successfully!", style="bold green")
        console.print("\nTo run the same steps on your own data:", style="bold")
        console.print("1. python main.py generate --model mixed_direct_sum --n 3 --dim 5 -o inst.json", style="dim")
        console.print("2. python main.py certify -i outputs/inst.json", style="dim")
        console.print("3. python main.py decompose -i outputs/inst.json", style="dim")

    except Exception as e:
        console.print(f"❌ Demo error: {e}", style="bold red")


if __name__ == "__main__":
    main()

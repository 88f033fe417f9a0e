"""Run ledger: experiment_runs and sweep_cells.

Revision ID: 001_run_ledger
Revises:
Create Date: 2026-10-19

"""
from typing import Sequence, Union

from alembic import op
import sqlalchemy as sa

# revision identifiers, used by Alembic.
revision: str = "001_run_ledger"
down_revision: Union[str, None] = None
branch_labels: Union[str, Sequence[str], None] = None
depends_on: Union[str, Sequence[str], None] = None


def upgrade() -> None:
    # -- experiment_runs -----------------------------------------------------
    op.create_table(
        "experiment_runs",
        sa.Column("id", sa.Uuid(as_uuid=True), primary_key=True),
        sa.Column("kind", sa.String(50), nullable=False),
        sa.Column("config", sa.JSON, nullable=False),
        sa.Column("seed", sa.Integer, nullable=True),
        sa.Column("verdict", sa.String(20), nullable=False),
        sa.Column("exit_code", sa.Integer, nullable=False),
        sa.Column("metrics", sa.JSON, nullable=True),
        sa.Column("report_path", sa.String(1000), nullable=True),
        sa.Column("created_at", sa.DateTime(timezone=True), nullable=False),
    )
    op.create_index("ix_experiment_runs_kind", "experiment_runs", ["kind"])

    # -- sweep_cells ---------------------------------------------------------
    op.create_table(
        "sweep_cells",
        sa.Column("id", sa.Uuid(as_uuid=True), primary_key=True),
        sa.Column(
            "run_id",
            sa.Uuid(as_uuid=True),
            sa.ForeignKey("experiment_runs.id", ondelete="CASCADE"),
            nullable=False,
        ),
        sa.Column("cell_index", sa.Integer, nullable=False),
        sa.Column("parameters", sa.JSON, nullable=False),
        sa.Column("status", sa.String(20), nullable=False),
        sa.Column("metrics", sa.JSON, nullable=True),
        sa.Column("error", sa.Text, nullable=True),
        sa.UniqueConstraint("run_id", "cell_index", name="uq_sweep_cells_run_index"),
    )
    op.create_index("ix_sweep_cells_run_id", "sweep_cells", ["run_id"])


def downgrade() -> None:
    op.drop_index("ix_sweep_cells_run_id", table_name="sweep_cells")
    op.drop_table("sweep_cells")
    op.drop_index("ix_experiment_runs_kind", table_name="experiment_runs")
    op.drop_table("experiment_runs")

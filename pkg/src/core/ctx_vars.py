from contextvars import ContextVar

# Context var to store the id of the current command or trial
run_id_ctx_var: ContextVar[str] = ContextVar("run_id", default="system")

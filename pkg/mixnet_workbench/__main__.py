from mixnet_workbench.main import run

run()

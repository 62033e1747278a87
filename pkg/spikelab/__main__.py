from spikelab.cli import main

main()

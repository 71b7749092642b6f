# MAP estimation, SURE values and SureMap objectives
